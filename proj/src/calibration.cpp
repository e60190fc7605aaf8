#include "mediaprof/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mediaprof/svm.hpp"
#include "mediaprof/util.hpp"

namespace mediaprof {

double PlattCalibrator::probability(double decision) const {
    const double fApB = A * decision + B;
    // Evaluate with the bigger exponent folded out so it never overflows.
    if (fApB >= 0) return std::exp(-fApB) / (1.0 + std::exp(-fApB));
    return 1.0 / (1.0 + std::exp(fApB));
}

namespace {

void smoothed_targets(std::span<const int> labels, std::vector<double>& t, double& hi, double& lo) {
    long n_pos = 0, n_neg = 0;
    for (int y : labels) (y > 0 ? n_pos : n_neg)++;
    hi = (static_cast<double>(n_pos) + 1.0) / (static_cast<double>(n_pos) + 2.0);
    lo = 1.0 / (static_cast<double>(n_neg) + 2.0);
    t.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) t[i] = labels[i] > 0 ? hi : lo;
}

double nll_at(double A, double B, std::span<const double> f, const std::vector<double>& t) {
    double value = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double fApB = A * f[i] + B;
        if (fApB >= 0)
            value += t[i] * fApB + std::log1p(std::exp(-fApB));
        else
            value += (t[i] - 1.0) * fApB + std::log1p(std::exp(fApB));
    }
    return value;
}

} // namespace

double platt_nll(double A, double B, std::span<const double> decisions, std::span<const int> labels) {
    std::vector<double> t;
    double hi, lo;
    smoothed_targets(labels, t, hi, lo);
    return nll_at(A, B, decisions, t);
}

PlattCalibrator fit_platt(std::span<const double> decisions, std::span<const int> labels,
                          const PlattOptions& opts) {
    if (decisions.size() != labels.size() || decisions.empty())
        throw ValidationError("fit_platt: decisions and labels must be non-empty and aligned");
    long n_pos = 0, n_neg = 0;
    for (int y : labels) (y > 0 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw ValidationError("fit_platt: both label signs must be present");

    std::vector<double> t;
    double hi, lo;
    smoothed_targets(labels, t, hi, lo);

    // Fit in normalized decision coordinates. This is the same sigmoid family
    // under an affine reparametrization, but it keeps the Newton system
    // well-conditioned when decisions are nearly constant (weak models emit
    // those routinely).
    double f_mean = 0.0;
    for (double f : decisions) f_mean += f;
    f_mean /= static_cast<double>(decisions.size());
    double f_var = 0.0;
    for (double f : decisions) f_var += (f - f_mean) * (f - f_mean);
    f_var /= static_cast<double>(decisions.size());
    const double f_scale = std::sqrt(f_var);

    double t_bar = 0.0;
    for (double ti : t) t_bar += ti;
    t_bar /= static_cast<double>(t.size());
    if (f_scale < 1e-12) {
        // Constant decisions: the slope carries no information, so the
        // sigmoid reduces to the smoothed base rate.
        return PlattCalibrator{0.0, std::log((1.0 - t_bar) / t_bar)};
    }
    std::vector<double> z(decisions.size());
    for (std::size_t i = 0; i < decisions.size(); ++i) z[i] = (decisions[i] - f_mean) / f_scale;

    const double sigma = 1e-12; // Hessian ridge
    const double min_step = 1e-10;
    double A = 0.0;
    double B = std::log((static_cast<double>(n_neg) + 1.0) / (static_cast<double>(n_pos) + 1.0));
    std::span<const double> decisions_z(z);
    double fval = nll_at(A, B, decisions_z, t);

    // Fold the normalization back into the raw-coordinate sigmoid.
    auto denormalized = [&](double a, double b) {
        return PlattCalibrator{a / f_scale, b - a * f_mean / f_scale};
    };

    for (int it = 0; it < opts.max_iterations; ++it) {
        double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double fApB = A * z[i] + B;
            double p, q;
            if (fApB >= 0) {
                p = std::exp(-fApB) / (1.0 + std::exp(-fApB));
                q = 1.0 / (1.0 + std::exp(-fApB));
            } else {
                p = 1.0 / (1.0 + std::exp(fApB));
                q = std::exp(fApB) / (1.0 + std::exp(fApB));
            }
            const double d2 = p * q;
            h11 += z[i] * z[i] * d2;
            h22 += d2;
            h21 += z[i] * d2;
            const double d1 = t[i] - p;
            g1 += z[i] * d1;
            g2 += d1;
        }
        if (std::sqrt(g1 * g1 + g2 * g2) <= opts.gradient_tol)
            return denormalized(A, B);

        const double det = h11 * h22 - h21 * h21;
        const double dA = -(h22 * g1 - h21 * g2) / det;
        const double dB = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * dA + g2 * dB;

        double step = 1.0;
        int halvings = 0;
        bool accepted = false;
        while (step >= min_step && halvings <= opts.max_halvings) {
            const double new_a = A + step * dA;
            const double new_b = B + step * dB;
            const double new_f = nll_at(new_a, new_b, decisions_z, t);
            if (new_f < fval + 1e-4 * step * gd) {
                A = new_a;
                B = new_b;
                fval = new_f;
                accepted = true;
                break;
            }
            step /= 2.0;
            ++halvings;
        }
        if (!accepted) {
            // No representable decrease left; the iterate is the optimum at
            // float resolution even though the gradient tolerance was not met.
            char norm[32];
            std::snprintf(norm, sizeof(norm), "%.2e", std::sqrt(g1 * g1 + g2 * g2));
            log_info("fit_platt: line search stalled at iteration " + std::to_string(it) +
                     ", gradient norm " + norm);
            return denormalized(A, B);
        }
    }
    throw ConvergenceError("fit_platt: no convergence after max iterations", opts.max_iterations, 0);
}

std::vector<double> couple_pairwise(const std::vector<std::vector<double>>& r, double sweep_tol,
                                    int max_sweeps) {
    const std::size_t k = r.size();
    if (k == 0) throw ValidationError("couple_pairwise: empty matrix");
    for (std::size_t i = 0; i < k; ++i) {
        if (r[i].size() != k) throw ValidationError("couple_pairwise: matrix must be square");
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            if (!(r[i][j] > 0.0 && r[i][j] < 1.0))
                throw ValidationError("couple_pairwise: r entries must lie in (0,1)");
            if (std::abs(r[i][j] + r[j][i] - 1.0) > 1e-6)
                throw ValidationError("couple_pairwise: r is not complementary (r_ji != 1-r_ij)");
        }
    }
    if (k == 1) return {1.0};

    std::vector<std::vector<double>> Q(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            Q[i][i] += r[j][i] * r[j][i];
            Q[i][j] = -r[j][i] * r[i][j];
        }
    }

    std::vector<double> p(k, 1.0 / static_cast<double>(k));
    std::vector<double> qp(k, 0.0);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double pqp = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            qp[i] = 0.0;
            for (std::size_t j = 0; j < k; ++j) qp[i] += Q[i][j] * p[j];
            pqp += p[i] * qp[i];
        }
        const std::vector<double> before = p;
        for (std::size_t ti = 0; ti < k; ++ti) {
            const double diff = (-qp[ti] + pqp) / Q[ti][ti];
            p[ti] += diff;
            pqp = (pqp + diff * (diff * Q[ti][ti] + 2.0 * qp[ti])) / ((1.0 + diff) * (1.0 + diff));
            for (std::size_t j = 0; j < k; ++j) {
                qp[j] = (qp[j] + diff * Q[ti][j]) / (1.0 + diff);
                p[j] /= (1.0 + diff);
            }
        }
        double change = 0.0;
        for (std::size_t i = 0; i < k; ++i) change = std::max(change, std::abs(p[i] - before[i]));
        if (change <= sweep_tol) {
            // Final normalize to shed accumulated round-off.
            double sum = 0.0;
            for (double v : p) sum += v;
            for (double& v : p) v /= sum;
            return p;
        }
    }
    throw ConvergenceError("couple_pairwise: no fixed point after max sweeps", max_sweeps, 0);
}

std::vector<double> predict_proba(const MulticlassSvm& model, std::span<const double> x) {
    const auto& classes = model.classes();
    const std::size_t k = classes.size();
    std::vector<std::vector<double>> r(k, std::vector<double>(k, 0.5));
    for (const auto& pair : model.pairs()) {
        if (!pair.calibrator)
            throw ValidationError("predict_proba: pair " + std::to_string(pair.pos_class) + "/" +
                                  std::to_string(pair.neg_class) + " has no fitted calibrator");
        const double f = pair.svm.decision(x);
        // Clamp away from {0,1}; coupling needs open-interval inputs.
        double prob = std::clamp(pair.calibrator->probability(f), 1e-7, 1.0 - 1e-7);
        const std::size_t i = model.class_index(pair.pos_class);
        const std::size_t j = model.class_index(pair.neg_class);
        r[i][j] = prob;
        r[j][i] = 1.0 - prob;
    }
    if (k == 2) {
        // Single pair: the coupling objective's minimizer is the calibrated
        // probability itself.
        return {r[0][1], r[1][0]};
    }
    return couple_pairwise(r);
}

} // namespace mediaprof
