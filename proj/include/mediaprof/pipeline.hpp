#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mediaprof/config.hpp"
#include "mediaprof/domain.hpp"
#include "mediaprof/experiments.hpp"

namespace mediaprof {

// The five source families, in canonical order.
const std::vector<std::string>& all_sources();
bool is_known_source(const std::string& source);

struct RunOverrides {
    std::optional<unsigned> seed;
    std::optional<int> jobs;
};

// Fetches raw evidence for every medium and persists it in the raw store.
// Returns a per-source summary: retrieved counts, missing-source counts,
// failures, coverage percentage.
nlohmann::json run_ingest(const Config& config, const Dataset& dataset,
                          const std::vector<std::string>& sources, const RunOverrides& ov = {});

// Builds per-medium feature bundles for the task from the raw store and
// writes them to the feature store. Media with no evidence at all still get
// an all-missing bundle.
nlohmann::json run_featurize(const Config& config, const Dataset& dataset, Task task,
                             const RunOverrides& ov = {});

// Grid-searches (C, gamma) by stratified k-fold, trains the final calibrated
// model on all labeled media, saves it under the models path.
nlohmann::json run_train(const Config& config, const Dataset& dataset, Task task,
                         const std::vector<std::string>& feature_ids, int folds = 5,
                         const std::optional<std::string>& model_out = std::nullopt,
                         const RunOverrides& ov = {});

// Nested cross-validation for one feature set / concatenation; writes the
// evaluation JSON and the out-of-fold posteriors under the reports path.
nlohmann::json run_evaluate(const Config& config, const Dataset& dataset, Task task,
                            const std::vector<std::string>& feature_ids, int folds = 5,
                            const RunOverrides& ov = {});

// Runs a bundled or file-based plan; writes report.json/report.md/report.csv
// under `out_dir` (default: reports/<plan>/<run-id>/). Returns the report.
ExperimentReport run_ablate(const Config& config, const Dataset& dataset,
                            const std::string& plan_name_or_path,
                            const std::optional<std::string>& out_dir = std::nullopt,
                            const RunOverrides& ov = {});

// Loads serialized models (one per task) and the medium's feature bundle;
// returns calibrated posteriors per task, flagged "low_evidence" when every
// source is missing.
nlohmann::json run_predict(const Config& config, const std::map<Task, std::string>& model_paths,
                           const std::string& medium_id);
nlohmann::json run_predict_models(const Config& config,
                                  const std::map<Task, const TrainedModel*>& models,
                                  const std::string& medium_id);

ExperimentPlan resolve_plan(const std::string& name_or_path);

} // namespace mediaprof
