#pragma once

#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mediaprof/calibration.hpp"
#include "mediaprof/errors.hpp"
#include "mediaprof/util.hpp"

namespace mediaprof {

// RBF is the only kernel; k(x,x) = 1 by construction.
struct KernelSpec {
    double gamma = 1.0;

    bool operator==(const KernelSpec&) const = default;
};

inline double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    return std::exp(-gamma * squared_distance(a, b));
}

struct SmoOptions {
    double tol = 1e-3;
    long max_iterations = 200000;
    std::size_t cache_rows = 256; // LRU capacity for Gram rows
};

// Soft-margin binary classifier in dual form:
//   f(x) = sum_i coef_i * k(sv_i, x) + bias,  coef_i = alpha_i * y_i.
class BinarySvm {
public:
    BinarySvm(Matrix support_vectors, std::vector<double> dual_coef, double bias, KernelSpec kernel,
              double cost);

    double decision(std::span<const double> x) const;

    const Matrix& support_vectors() const { return support_vectors_; }
    const std::vector<double>& dual_coef() const { return dual_coef_; }
    double bias() const { return bias_; }
    const KernelSpec& kernel() const { return kernel_; }
    double cost() const { return c_; }
    std::size_t dim() const { return support_vectors_.cols; }

    // Value of e'a - a'Qa/2 at the solution; filled by the trainer.
    double dual_objective = 0.0;
    long iterations = 0;

private:
    Matrix support_vectors_;
    std::vector<double> dual_coef_;
    double bias_;
    KernelSpec kernel_;
    double c_;
};

// Thrown when SMO hits its iteration bound; carries the partial solution
// (null when no support vector exists yet) plus the violation count.
class SmoNonConvergence : public ConvergenceError {
public:
    SmoNonConvergence(const std::string& msg, long iterations, long violations,
                      std::shared_ptr<const BinarySvm> best)
        : ConvergenceError(msg, iterations, violations), best_(std::move(best)) {}
    const BinarySvm* best_iterate() const { return best_.get(); }

private:
    std::shared_ptr<const BinarySvm> best_;
};

// SMO with maximal-violating-pair working-set selection. Labels are +1/-1;
// both signs must be present. Throws SmoNonConvergence past max_iterations.
BinarySvm train_binary(const Matrix& x, std::span<const int> y, double cost, KernelSpec kernel,
                       const SmoOptions& opts = {});

// Per-dimension z-scoring fitted on training data. Zero-variance dimensions
// keep scale 1.
struct StandardScaler {
    std::vector<double> mean;
    std::vector<double> scale;

    static StandardScaler fit(const Matrix& x);
    std::vector<double> transform(std::span<const double> x) const;
    Matrix transform(const Matrix& x) const;

    bool operator==(const StandardScaler&) const = default;
};

struct PairwiseModel {
    int pos_class = 0; // decision > 0 votes for this class
    int neg_class = 0;
    BinarySvm svm;
    std::optional<PlattCalibrator> calibrator;
};

class MulticlassSvm {
public:
    MulticlassSvm() = default;
    MulticlassSvm(std::vector<int> classes, std::vector<PairwiseModel> pairs, std::size_t dim);

    // One-vs-one majority vote; ties fall back to summed decision values,
    // then the smallest class code.
    int predict(std::span<const double> x) const;

    // Pairwise decision values in pair order.
    std::vector<double> decision_all(std::span<const double> x) const;

    const std::vector<int>& classes() const { return classes_; }
    const std::vector<PairwiseModel>& pairs() const { return pairs_; }
    std::vector<PairwiseModel>& pairs() { return pairs_; }
    std::size_t class_index(int code) const;
    std::size_t dim() const { return dim_; }

private:
    std::vector<int> classes_; // ascending codes
    std::vector<PairwiseModel> pairs_;
    std::size_t dim_ = 0;
};

struct MulticlassOptions {
    SmoOptions smo;
    bool calibrate = false;
    int calibration_folds = 3;
    unsigned seed = 13;
    int jobs = 1;
};

MulticlassSvm train_multiclass(const Matrix& x, std::span<const int> y, double cost,
                               KernelSpec kernel, const MulticlassOptions& opts = {});

// A deployable classifier: scaler + calibrated one-vs-one SVM + the feature
// ids the design matrix was assembled from.
struct TrainedModel {
    std::string task;
    std::vector<std::string> feature_ids;
    double cost = 1.0;
    KernelSpec kernel;
    StandardScaler scaler;
    MulticlassSvm svm;

    int predict(std::span<const double> raw) const;
    std::vector<double> predict_probabilities(std::span<const double> raw) const;

    nlohmann::json to_json() const;
    static TrainedModel from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static TrainedModel load(const std::filesystem::path& path);
};

} // namespace mediaprof
