#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mediaprof/domain.hpp"
#include "mediaprof/feature_store.hpp"
#include "mediaprof/selection.hpp"

namespace mediaprof {

enum class CombineMode { Single, Concat, Ensemble };

std::string to_string(CombineMode m);
CombineMode parse_combine_mode(const std::string& s);

struct PlanRow {
    std::string row_id;
    std::string group;
    std::string label;
    std::vector<std::string> feature_ids;
    CombineMode mode = CombineMode::Single;
};

struct ExperimentPlan {
    std::string name;
    Task task = Task::Bias;
    unsigned seed = 13;
    int folds = 5;
    std::optional<Grid> grid; // absent: caller's default
    std::vector<PlanRow> rows;

    void validate(const FeatureRegistry& registry) const;
    nlohmann::json to_json() const;
    static ExperimentPlan from_json(const nlohmann::json& j);
    static ExperimentPlan load(const std::filesystem::path& path);

    // Built-in ablation plans mirroring the two report tables.
    static std::optional<ExperimentPlan> bundled(const std::string& name);
    static std::vector<std::string> bundled_names();
};

struct ConstituentScore {
    double macro_f1 = 0.0;
    double accuracy = 0.0;
};

struct ReportRow {
    std::string row_id;
    std::string group;
    std::string label;
    std::vector<std::string> feature_ids;
    std::string mode; // "baseline" | "single" | "concat" | "ensemble"
    std::optional<std::size_t> dim;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    std::map<std::string, double> weights;               // ensemble rows: learned weights
    std::map<std::string, ConstituentScore> constituents; // ensemble rows: per-model scores
    std::vector<FoldResult> folds;
};

struct ExperimentReport {
    std::string plan_name;
    Task task = Task::Bias;
    unsigned seed = 13;
    std::string snapshot_id;
    Grid grid;
    std::vector<ReportRow> rows;

    nlohmann::json to_json() const;
    static ExperimentReport from_json(const nlohmann::json& j);
};

enum class ReportFormat { Json, Markdown, Csv };
ReportFormat parse_report_format(const std::string& s);

std::string render_report(const ExperimentReport& report, ReportFormat format);

struct RunPlanOptions {
    int jobs = 1;
    CvOptions cv;
    double ensemble_step = 0.05;
};

// Executes the plan: a majority-class baseline row first, then one row per
// plan entry. Single/concat rows run nested cross-validation on the
// (concatenated) design matrix; ensemble rows cross-validate each feature set,
// learn combination weights per outer fold on the out-of-fold posteriors of
// the training side, and score the held-out rows under those weights.
ExperimentReport run_plan(const ExperimentPlan& plan, const Dataset& dataset,
                          const FeatureStore& store, const FeatureRegistry& registry,
                          const RunPlanOptions& opts = {});

} // namespace mediaprof
