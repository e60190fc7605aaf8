#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mediaprof/domain.hpp"
#include "mediaprof/ensemble.hpp"
#include "mediaprof/svm.hpp"

namespace mediaprof {

// Stratified fold assignment over a labeled id set. Per-class counts across
// folds differ by at most one, and so do total fold sizes.
struct FoldPlan {
    int k = 5;
    unsigned seed = 13;
    std::vector<std::string> ids;  // dataset order
    std::vector<int> fold_of;      // aligned with ids

    int fold(const std::string& id) const;
    std::vector<long> fold_sizes() const;
};

FoldPlan make_folds(const std::vector<std::string>& ids, const std::vector<int>& labels, int k,
                    unsigned seed,
                    const std::function<std::string(int)>& class_namer = nullptr);
FoldPlan make_folds(const Dataset& ds, Task task, int k = 5, unsigned seed = 13);

struct Grid {
    std::vector<double> c_values;
    std::vector<double> gamma_values;

    void validate() const;
    nlohmann::json to_json() const;
    static Grid from_json(const nlohmann::json& j);
    static Grid default_grid();
};

using Confusion = std::vector<std::vector<long>>;

double accuracy(const Confusion& confusion);
double macro_f1(const Confusion& confusion);

struct FoldResult {
    int fold = 0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    Confusion confusion;
    double chosen_c = 0.0;
    double chosen_gamma = 0.0;
};

struct EvalResult {
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    std::vector<int> classes;
    Confusion confusion;
    std::vector<FoldResult> folds;

    nlohmann::json to_json() const;
};

EvalResult eval_from_confusion(std::vector<int> classes, Confusion confusion,
                               std::vector<FoldResult> folds = {});

// A design matrix with row ids and class codes.
struct LabeledMatrix {
    std::vector<std::string> ids;
    Matrix x;
    std::vector<int> y;

    void validate() const;
};

struct CvOptions {
    int inner_folds = 3;
    int jobs = 1;
    SmoOptions smo;
    int calibration_folds = 3;
};

struct CvResult {
    EvalResult eval;
    PosteriorMatrix out_of_fold; // one calibrated posterior row per labeled medium
};

struct GridChoice {
    double c = 0.0;
    double gamma = 0.0;
    double macro_f1 = 0.0;
};

// k-fold grid search over (C, gamma) maximizing macro-F1 of the vote-based
// predictions; ties prefer smaller C, then smaller gamma.
GridChoice select_hyperparams(const LabeledMatrix& data, const Grid& grid, const FoldPlan& plan,
                              const CvOptions& opts = {});

// Nested cross-validation: per outer fold, an inner stratified grid search on
// the training folds picks (C, gamma) by macro-F1 (ties: smaller C, then
// smaller gamma); the winner is retrained with calibration on the full
// training side and evaluated on the held-out fold. The inner loop never sees
// held-out rows.
CvResult cross_validate(const LabeledMatrix& data, const Grid& grid, const FoldPlan& plan,
                        const CvOptions& opts = {});

// Majority-class predictor scored on the same labeled rows; the standing
// baseline row of every report.
EvalResult majority_baseline(std::span<const int> labels);

} // namespace mediaprof
