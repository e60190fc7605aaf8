#include "mediaprof/svm.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <list>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

namespace mediaprof {

namespace {

// LRU cache of Gram-matrix rows against the training set. Purely a
// memoization layer; the solver's results do not depend on its size.
class KernelRowCache {
public:
    KernelRowCache(const Matrix& x, KernelSpec kernel, std::size_t capacity)
        : x_(x), kernel_(kernel), capacity_(std::max<std::size_t>(2, capacity)) {}

    const std::vector<double>& row(std::size_t i) {
        auto it = index_.find(i);
        if (it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->second;
        }
        if (lru_.size() >= capacity_) {
            index_.erase(lru_.back().first);
            lru_.pop_back();
        }
        std::vector<double> values(x_.rows);
        for (std::size_t t = 0; t < x_.rows; ++t)
            values[t] = rbf_kernel(x_.row(i), x_.row(t), kernel_.gamma);
        lru_.emplace_front(i, std::move(values));
        index_[i] = lru_.begin();
        return lru_.front().second;
    }

private:
    const Matrix& x_;
    KernelSpec kernel_;
    std::size_t capacity_;
    std::list<std::pair<std::size_t, std::vector<double>>> lru_;
    std::unordered_map<std::size_t, decltype(lru_)::iterator> index_;
};

bool in_up_set(double alpha, int y, double c) { return y > 0 ? alpha < c : alpha > 0.0; }
bool in_low_set(double alpha, int y, double c) { return y > 0 ? alpha > 0.0 : alpha < c; }

// Assembles a BinarySvm from the solver state: bias from the KKT conditions
// (average y*G over free vectors, midpoint of the active bounds otherwise),
// objective e'a - a'Qa/2 folded out of the gradient.
BinarySvm assemble_model(const Matrix& x, std::span<const int> y, const std::vector<double>& alpha,
                         const std::vector<double>& grad, KernelSpec kernel, double cost,
                         long iterations) {
    const std::size_t n = x.rows;
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    long free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = static_cast<double>(y[t]) * grad[t];
        if (alpha[t] >= cost) {
            if (y[t] < 0) upper = std::min(upper, yg);
            else lower = std::max(lower, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] > 0) upper = std::min(upper, yg);
            else lower = std::max(lower, yg);
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count)
                                      : (upper + lower) / 2.0;

    double objective = 0.0;
    for (std::size_t t = 0; t < n; ++t) objective += alpha[t] * (1.0 - grad[t]);
    objective /= 2.0;

    std::vector<std::size_t> sv_idx;
    for (std::size_t t = 0; t < n; ++t)
        if (alpha[t] > 0.0) sv_idx.push_back(t);
    if (sv_idx.empty()) throw ValidationError("train_binary: solution has no support vectors");

    Matrix sv(sv_idx.size(), x.cols);
    std::vector<double> coef(sv_idx.size());
    for (std::size_t k = 0; k < sv_idx.size(); ++k) {
        auto src = x.row(sv_idx[k]);
        std::copy(src.begin(), src.end(), sv.row(k).begin());
        coef[k] = alpha[sv_idx[k]] * static_cast<double>(y[sv_idx[k]]);
    }

    BinarySvm model(std::move(sv), std::move(coef), -rho, kernel, cost);
    model.dual_objective = objective;
    model.iterations = iterations;
    return model;
}

} // namespace

BinarySvm::BinarySvm(Matrix support_vectors, std::vector<double> dual_coef, double bias,
                     KernelSpec kernel, double cost)
    : support_vectors_(std::move(support_vectors)),
      dual_coef_(std::move(dual_coef)),
      bias_(bias),
      kernel_(kernel),
      c_(cost) {
    if (support_vectors_.rows == 0) throw ValidationError("BinarySvm: no support vectors");
    if (support_vectors_.rows != dual_coef_.size())
        throw ValidationError("BinarySvm: support vector / coefficient count mismatch");
    if (kernel_.gamma <= 0.0) throw ValidationError("BinarySvm: gamma must be positive");
    if (c_ <= 0.0) throw ValidationError("BinarySvm: C must be positive");
    double coef_sum = 0.0;
    for (double a : dual_coef_) {
        if (std::abs(a) > c_ * (1.0 + 1e-9))
            throw ValidationError("BinarySvm: dual coefficient outside [0, C]");
        coef_sum += a;
    }
    if (std::abs(coef_sum) > 1e-8 * std::max(1.0, c_ * static_cast<double>(dual_coef_.size())))
        throw ValidationError("BinarySvm: dual feasibility violated (sum alpha*y != 0)");
}

double BinarySvm::decision(std::span<const double> x) const {
    if (x.size() != support_vectors_.cols)
        throw ValidationError("decision: input dim " + std::to_string(x.size()) +
                              " != model dim " + std::to_string(support_vectors_.cols));
    double f = bias_;
    for (std::size_t i = 0; i < support_vectors_.rows; ++i)
        f += dual_coef_[i] * rbf_kernel(support_vectors_.row(i), x, kernel_.gamma);
    return f;
}

BinarySvm train_binary(const Matrix& x, std::span<const int> y, double cost, KernelSpec kernel,
                       const SmoOptions& opts) {
    const std::size_t n = x.rows;
    if (n == 0 || y.size() != n) throw ValidationError("train_binary: bad training set shape");
    if (cost <= 0.0) throw ValidationError("train_binary: C must be positive");
    if (kernel.gamma <= 0.0) throw ValidationError("train_binary: gamma must be positive");
    long n_pos = 0, n_neg = 0;
    for (int yi : y) {
        if (yi != 1 && yi != -1) throw ValidationError("train_binary: labels must be +1/-1");
        (yi > 0 ? n_pos : n_neg)++;
    }
    if (n_pos == 0 || n_neg == 0)
        throw ValidationError("train_binary: both classes must be present");

    KernelRowCache cache(x, kernel, opts.cache_rows);

    // Dual problem min 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij,
    // subject to y'a = 0, 0 <= a <= C. Gradient G = Qa - e.
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);

    long iter = 0;
    for (;; ++iter) {
        // Maximal violating pair.
        std::size_t i = n, j = n;
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -static_cast<double>(y[t]) * grad[t];
            if (in_up_set(alpha[t], y[t], cost) && v > m_up) {
                m_up = v;
                i = t;
            }
            if (in_low_set(alpha[t], y[t], cost) && v < m_low) {
                m_low = v;
                j = t;
            }
        }
        if (i == n || j == n || m_up - m_low <= opts.tol) break;

        if (iter >= opts.max_iterations) {
            long violations = 0;
            for (std::size_t t = 0; t < n; ++t) {
                const double v = -static_cast<double>(y[t]) * grad[t];
                if (in_up_set(alpha[t], y[t], cost) && v > m_low + opts.tol) ++violations;
                else if (in_low_set(alpha[t], y[t], cost) && v < m_up - opts.tol) ++violations;
            }
            std::shared_ptr<const BinarySvm> best;
            try {
                best = std::make_shared<BinarySvm>(
                    assemble_model(x, y, alpha, grad, kernel, cost, iter));
            } catch (const Error&) {
                // no usable iterate yet
            }
            throw SmoNonConvergence("train_binary: SMO did not converge after " +
                                        std::to_string(iter) + " iterations (gap " +
                                        std::to_string(m_up - m_low) + ")",
                                    iter, violations, std::move(best));
        }

        const std::vector<double>& row_i = cache.row(i);
        const std::vector<double>& row_j = cache.row(j);
        const double eta = std::max(row_i[i] + row_j[j] - 2.0 * row_i[j], 1e-12);

        // Newton step along the feasible two-variable direction, clipped to
        // the box. E_t = y_t * G_t equals f(x_t) - y_t up to the bias, which
        // cancels in the difference.
        const double e_i = static_cast<double>(y[i]) * grad[i];
        const double e_j = static_cast<double>(y[j]) * grad[j];
        double lo, hi;
        if (y[i] != y[j]) {
            lo = std::max(0.0, alpha[j] - alpha[i]);
            hi = std::min(cost, cost + alpha[j] - alpha[i]);
        } else {
            lo = std::max(0.0, alpha[i] + alpha[j] - cost);
            hi = std::min(cost, alpha[i] + alpha[j]);
        }
        double aj_new = std::clamp(alpha[j] + static_cast<double>(y[j]) * (e_i - e_j) / eta, lo, hi);
        double ai_new = alpha[i] -
                        static_cast<double>(y[i]) * static_cast<double>(y[j]) * (aj_new - alpha[j]);
        // Snap bound-touching values exactly onto the bound. Clipping
        // arithmetic otherwise leaves 1e-16 residues that keep a variable in
        // the working set while no representable step can move it, which
        // deadlocks the violating-pair selection.
        const double dust = 1e-11 * cost;
        if (ai_new < dust) ai_new = 0.0;
        else if (ai_new > cost - dust) ai_new = cost;
        if (aj_new < dust) aj_new = 0.0;
        else if (aj_new > cost - dust) aj_new = cost;
        const double delta_i = ai_new - alpha[i];
        const double delta_j = aj_new - alpha[j];
        alpha[i] = ai_new;
        alpha[j] = aj_new;

        for (std::size_t t = 0; t < n; ++t)
            grad[t] += static_cast<double>(y[t]) *
                       (static_cast<double>(y[i]) * row_i[t] * delta_i +
                        static_cast<double>(y[j]) * row_j[t] * delta_j);
    }

    return assemble_model(x, y, alpha, grad, kernel, cost, iter);
}

StandardScaler StandardScaler::fit(const Matrix& x) {
    if (x.rows == 0) throw ValidationError("StandardScaler: empty matrix");
    StandardScaler s;
    s.mean.assign(x.cols, 0.0);
    s.scale.assign(x.cols, 1.0);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) s.mean[j] += x.at(i, j);
    for (double& m : s.mean) m /= static_cast<double>(x.rows);
    std::vector<double> var(x.cols, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double d = x.at(i, j) - s.mean[j];
            var[j] += d * d;
        }
    for (std::size_t j = 0; j < x.cols; ++j) {
        var[j] /= static_cast<double>(x.rows);
        s.scale[j] = var[j] > 0.0 ? std::sqrt(var[j]) : 1.0;
    }
    return s;
}

std::vector<double> StandardScaler::transform(std::span<const double> x) const {
    if (x.size() != mean.size()) throw ValidationError("StandardScaler: dim mismatch");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
    return out;
}

Matrix StandardScaler::transform(const Matrix& x) const {
    Matrix out(x.rows, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        auto t = transform(x.row(i));
        std::copy(t.begin(), t.end(), out.row(i).begin());
    }
    return out;
}

MulticlassSvm::MulticlassSvm(std::vector<int> classes, std::vector<PairwiseModel> pairs,
                             std::size_t dim)
    : classes_(std::move(classes)), pairs_(std::move(pairs)), dim_(dim) {
    const std::size_t k = classes_.size();
    if (k < 2) throw ValidationError("MulticlassSvm: needs at least two classes");
    if (pairs_.size() != k * (k - 1) / 2)
        throw ValidationError("MulticlassSvm: expected K(K-1)/2 pairwise models");
}

std::size_t MulticlassSvm::class_index(int code) const {
    auto it = std::lower_bound(classes_.begin(), classes_.end(), code);
    if (it == classes_.end() || *it != code)
        throw ValidationError("MulticlassSvm: unknown class code " + std::to_string(code));
    return static_cast<std::size_t>(it - classes_.begin());
}

int MulticlassSvm::predict(std::span<const double> x) const {
    std::vector<int> votes(classes_.size(), 0);
    std::vector<double> margin(classes_.size(), 0.0);
    for (const auto& pair : pairs_) {
        const double f = pair.svm.decision(x);
        const std::size_t i = class_index(pair.pos_class);
        const std::size_t j = class_index(pair.neg_class);
        if (f > 0) ++votes[i];
        else ++votes[j];
        margin[i] += f;
        margin[j] -= f;
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes_.size(); ++c) {
        if (votes[c] > votes[best]) best = c;
        else if (votes[c] == votes[best] && margin[c] > margin[best]) best = c;
        // equal votes and margins: keep the smaller class code
    }
    return classes_[best];
}

std::vector<double> MulticlassSvm::decision_all(std::span<const double> x) const {
    std::vector<double> out;
    out.reserve(pairs_.size());
    for (const auto& pair : pairs_) out.push_back(pair.svm.decision(x));
    return out;
}

namespace {

// Stratified fold ids for calibration cross-fitting; both signs stay
// represented in every training part.
std::vector<int> calibration_fold_ids(std::span<const int> y, int folds, unsigned seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t t = 0; t < y.size(); ++t) (y[t] > 0 ? pos : neg).push_back(t);
    std::vector<int> fold_of(y.size(), 0);
    std::mt19937_64 rng(seed);
    for (auto* group : {&pos, &neg}) {
        deterministic_shuffle(*group, rng);
        for (std::size_t k = 0; k < group->size(); ++k)
            fold_of[(*group)[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
    }
    return fold_of;
}

} // namespace

MulticlassSvm train_multiclass(const Matrix& x, std::span<const int> y, double cost,
                               KernelSpec kernel, const MulticlassOptions& opts) {
    if (x.rows == 0 || y.size() != x.rows)
        throw ValidationError("train_multiclass: bad training set shape");
    std::set<int> class_set(y.begin(), y.end());
    if (class_set.size() < 2)
        throw ValidationError("train_multiclass: at least two classes required");
    std::vector<int> classes(class_set.begin(), class_set.end());

    struct PairSpec {
        int pos, neg;
    };
    std::vector<PairSpec> specs;
    for (std::size_t a = 0; a < classes.size(); ++a)
        for (std::size_t b = a + 1; b < classes.size(); ++b)
            specs.push_back({classes[a], classes[b]});

    std::vector<std::optional<PairwiseModel>> built(specs.size());
    parallel_for(specs.size(), opts.jobs, [&](std::size_t p) {
        const auto [pos, neg] = specs[p];
        std::vector<std::size_t> rows;
        for (std::size_t t = 0; t < x.rows; ++t)
            if (y[t] == pos || y[t] == neg) rows.push_back(t);
        Matrix sub(rows.size(), x.cols);
        std::vector<int> sub_y(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            auto src = x.row(rows[k]);
            std::copy(src.begin(), src.end(), sub.row(k).begin());
            sub_y[k] = y[rows[k]] == pos ? 1 : -1;
        }

        PairwiseModel pm{pos, neg, train_binary(sub, sub_y, cost, kernel, opts.smo), std::nullopt};

        if (opts.calibrate) {
            long n_pos = std::count(sub_y.begin(), sub_y.end(), 1);
            long n_neg = static_cast<long>(sub_y.size()) - n_pos;
            std::vector<double> decisions;
            std::vector<int> labels;
            if (n_pos >= opts.calibration_folds && n_neg >= opts.calibration_folds) {
                // Cross-fitted decision values: each point is scored by a
                // model that did not train on it.
                auto fold_of = calibration_fold_ids(sub_y, opts.calibration_folds,
                                                    opts.seed + static_cast<unsigned>(p) * 7919u);
                for (int f = 0; f < opts.calibration_folds; ++f) {
                    std::vector<std::size_t> tr;
                    for (std::size_t t = 0; t < sub_y.size(); ++t)
                        if (fold_of[t] != f) tr.push_back(t);
                    Matrix xf(tr.size(), sub.cols);
                    std::vector<int> yf(tr.size());
                    for (std::size_t k = 0; k < tr.size(); ++k) {
                        auto src = sub.row(tr[k]);
                        std::copy(src.begin(), src.end(), xf.row(k).begin());
                        yf[k] = sub_y[tr[k]];
                    }
                    BinarySvm fold_model = train_binary(xf, yf, cost, kernel, opts.smo);
                    for (std::size_t t = 0; t < sub_y.size(); ++t)
                        if (fold_of[t] == f) {
                            decisions.push_back(fold_model.decision(sub.row(t)));
                            labels.push_back(sub_y[t]);
                        }
                }
            } else {
                // Too few points per sign to cross-fit; fall back to
                // in-sample decisions.
                for (std::size_t t = 0; t < sub_y.size(); ++t) {
                    decisions.push_back(pm.svm.decision(sub.row(t)));
                    labels.push_back(sub_y[t]);
                }
            }
            pm.calibrator = fit_platt(decisions, labels);
        }
        built[p] = std::move(pm);
    });

    std::vector<PairwiseModel> pairs;
    pairs.reserve(built.size());
    for (auto& pm : built) pairs.push_back(std::move(*pm));
    return MulticlassSvm(std::move(classes), std::move(pairs), x.cols);
}

int TrainedModel::predict(std::span<const double> raw) const {
    return svm.predict(scaler.transform(raw));
}

std::vector<double> TrainedModel::predict_probabilities(std::span<const double> raw) const {
    const auto z = scaler.transform(raw);
    return predict_proba(svm, z);
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    return nlohmann::json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    m.data = j.at("data").get<std::vector<double>>();
    if (m.data.size() != m.rows * m.cols) throw ParseError("matrix shape/data mismatch");
    return m;
}

} // namespace

nlohmann::json TrainedModel::to_json() const {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : svm.pairs()) {
        nlohmann::json pj{{"pos_class", p.pos_class},
                          {"neg_class", p.neg_class},
                          {"support_vectors", matrix_to_json(p.svm.support_vectors())},
                          {"dual_coef", p.svm.dual_coef()},
                          {"bias", p.svm.bias()}};
        if (p.calibrator) pj["platt"] = {{"A", p.calibrator->A}, {"B", p.calibrator->B}};
        pairs.push_back(std::move(pj));
    }
    return nlohmann::json{{"schema_version", 1},
                          {"task", task},
                          {"feature_ids", feature_ids},
                          {"cost", cost},
                          {"gamma", kernel.gamma},
                          {"classes", svm.classes()},
                          {"scaler", {{"mean", scaler.mean}, {"scale", scaler.scale}}},
                          {"pairs", pairs}};
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
    TrainedModel m;
    m.task = j.at("task").get<std::string>();
    m.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
    m.cost = j.at("cost").get<double>();
    m.kernel.gamma = j.at("gamma").get<double>();
    m.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    m.scaler.scale = j.at("scaler").at("scale").get<std::vector<double>>();
    std::vector<int> classes = j.at("classes").get<std::vector<int>>();
    std::vector<PairwiseModel> pairs;
    for (const auto& pj : j.at("pairs")) {
        PairwiseModel pm{pj.at("pos_class").get<int>(), pj.at("neg_class").get<int>(),
                         BinarySvm(matrix_from_json(pj.at("support_vectors")),
                                   pj.at("dual_coef").get<std::vector<double>>(),
                                   pj.at("bias").get<double>(), m.kernel, m.cost),
                         std::nullopt};
        if (pj.contains("platt"))
            pm.calibrator =
                PlattCalibrator{pj["platt"].at("A").get<double>(), pj["platt"].at("B").get<double>()};
        pairs.push_back(std::move(pm));
    }
    const std::size_t dim = m.scaler.mean.size();
    m.svm = MulticlassSvm(std::move(classes), std::move(pairs), dim);
    return m;
}

void TrainedModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write model: " + path.string());
    out << to_json().dump(2) << "\n";
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open model: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("model file " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

} // namespace mediaprof
