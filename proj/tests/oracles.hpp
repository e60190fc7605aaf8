#pragma once

// Independent reference implementations the solvers are checked against.
// Everything here is deliberately brute-force and shares no code with the
// library paths under test.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mediaprof/util.hpp"
#include "mediaprof/vtt.hpp"

namespace mediaprof::oracle {

// ------------------------------------------------------------ SVM dual QP

struct QpSolution {
    std::vector<double> alpha;
    double objective = 0.0; // e'a - a'Qa/2
    double bias = 0.0;
};

// Projection of v onto {0 <= a <= C, y'a = 0} by bisection on the constraint
// multiplier.
inline std::vector<double> project_box_hyperplane(const std::vector<double>& v,
                                                  const std::vector<int>& y, double c) {
    const std::size_t n = v.size();
    double lo = -1.0, hi = 1.0;
    for (double vi : v) {
        lo = std::min(lo, -(std::fabs(vi) + c + 1.0));
        hi = std::max(hi, std::fabs(vi) + c + 1.0);
    }
    auto constraint = [&](double lambda) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = std::clamp(v[i] - lambda * y[i], 0.0, c);
            s += y[i] * a;
        }
        return s;
    };
    for (int it = 0; it < 200; ++it) {
        const double mid = (lo + hi) / 2.0;
        if (constraint(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    const double lambda = (lo + hi) / 2.0;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp(v[i] - lambda * y[i], 0.0, c);
    return out;
}

// Accelerated projected-gradient ascent on the dual. Dense; fine up to a few
// hundred points.
inline QpSolution solve_svm_dual_qp(const Matrix& x, const std::vector<int>& y, double c,
                                    double gamma, int max_iter = 60000) {
    const std::size_t n = x.rows;
    std::vector<std::vector<double>> q(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            q[i][j] = y[i] * y[j] * std::exp(-gamma * squared_distance(x.row(i), x.row(j)));

    auto objective = [&](const std::vector<double>& a) {
        double lin = 0.0, quad = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            lin += a[i];
            for (std::size_t j = 0; j < n; ++j) quad += a[i] * q[i][j] * a[j];
        }
        return lin - quad / 2.0;
    };

    const double step = 1.0 / static_cast<double>(n); // 1/L with L <= trace(Q) = n
    std::vector<double> a(n, 0.0), a_prev(n, 0.0), momentum(n, 0.0), candidate(n);
    double last_obj = objective(a);
    long since_restart = 1;
    for (int k = 1; k <= max_iter; ++k) {
        const double beta =
            static_cast<double>(since_restart - 1) / static_cast<double>(since_restart + 2);
        for (std::size_t i = 0; i < n; ++i) momentum[i] = a[i] + beta * (a[i] - a_prev[i]);
        for (std::size_t i = 0; i < n; ++i) {
            double qi = 0.0;
            for (std::size_t j = 0; j < n; ++j) qi += q[i][j] * momentum[j];
            candidate[i] = momentum[i] + step * (1.0 - qi);
        }
        a_prev = a;
        a = project_box_hyperplane(candidate, y, c);
        ++since_restart;
        if (k % 25 == 0) {
            const double obj = objective(a);
            if (obj < last_obj) since_restart = 1; // momentum overshoot, restart
            last_obj = obj;
            // stationarity: a fixed point of the projected ascent step
            for (std::size_t i = 0; i < n; ++i) {
                double qi = 0.0;
                for (std::size_t j = 0; j < n; ++j) qi += q[i][j] * a[j];
                candidate[i] = a[i] + step * (1.0 - qi);
            }
            const auto next = project_box_hyperplane(candidate, y, c);
            double residual = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                residual = std::max(residual, std::fabs(next[i] - a[i]));
            if (residual <= 1e-10) break;
        }
    }

    QpSolution sol;
    sol.alpha = a;
    sol.objective = objective(a);

    // bias from free vectors; fall back to the midpoint over all points
    double free_sum = 0.0;
    long free_count = 0;
    double lo = -1e300, hi = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
        double f = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            f += a[j] * y[j] * std::exp(-gamma * squared_distance(x.row(j), x.row(i)));
        const double margin = y[i] - f; // candidate bias
        const double eps = 1e-8 * c;
        if (a[i] > eps && a[i] < c - eps) {
            free_sum += margin;
            ++free_count;
        } else if (a[i] <= eps) {
            if (y[i] > 0) hi = std::min(hi, margin);
            else lo = std::max(lo, margin);
        } else {
            if (y[i] > 0) lo = std::max(lo, margin);
            else hi = std::min(hi, margin);
        }
    }
    sol.bias = free_count > 0 ? free_sum / free_count : (lo + hi) / 2.0;
    return sol;
}

inline double qp_decision(const Matrix& x, const std::vector<int>& y, const QpSolution& sol,
                          double gamma, std::span<const double> point) {
    double f = sol.bias;
    for (std::size_t j = 0; j < x.rows; ++j)
        f += sol.alpha[j] * y[j] * std::exp(-gamma * squared_distance(x.row(j), point));
    return f;
}

// ------------------------------------------------------------ Platt NLL

// Negative log-likelihood with the smoothed targets, written from the
// definition.
inline double platt_nll_reference(double a, double b, const std::vector<double>& f,
                                  const std::vector<int>& y) {
    long n_pos = 0, n_neg = 0;
    for (int yi : y) (yi > 0 ? n_pos : n_neg)++;
    const double hi = (n_pos + 1.0) / (n_pos + 2.0);
    const double lo = 1.0 / (n_neg + 2.0);
    double nll = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double t = y[i] > 0 ? hi : lo;
        const double z = a * f[i] + b;
        // p = 1/(1+e^z); nll -= t log p + (1-t) log(1-p), stable split
        if (z >= 0) nll += t * z + std::log1p(std::exp(-z));
        else nll += (t - 1.0) * z + std::log1p(std::exp(z));
    }
    return nll;
}

struct PlattGridResult {
    double a = 0.0, b = 0.0, nll = 0.0;
};

inline PlattGridResult platt_grid_search(const std::vector<double>& f, const std::vector<int>& y,
                                         double a_lo = -25.0, double a_hi = 5.0, double b_lo = -8.0,
                                         double b_hi = 8.0, int steps = 200) {
    PlattGridResult best;
    best.nll = 1e300;
    for (int ia = 0; ia < steps; ++ia) {
        const double a = a_lo + (a_hi - a_lo) * ia / (steps - 1);
        for (int ib = 0; ib < steps; ++ib) {
            const double b = b_lo + (b_hi - b_lo) * ib / (steps - 1);
            const double nll = platt_nll_reference(a, b, f, y);
            if (nll < best.nll) best = {a, b, nll};
        }
    }
    return best;
}

// ------------------------------------------------------------ coupling

inline double coupling_objective(const std::vector<std::vector<double>>& r,
                                 const std::vector<double>& p) {
    const std::size_t k = r.size();
    double obj = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            const double d = r[j][i] * p[i] - r[i][j] * p[j];
            obj += d * d;
        }
    return obj;
}

// Exhaustive simplex grid for K=3, step 1e-3.
inline std::vector<double> coupling_grid_search(const std::vector<std::vector<double>>& r,
                                                int steps = 1000) {
    std::vector<double> best = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    double best_obj = 1e300;
    for (int i = 0; i <= steps; ++i) {
        for (int j = 0; j + i <= steps; ++j) {
            const double p0 = static_cast<double>(i) / steps;
            const double p1 = static_cast<double>(j) / steps;
            const std::vector<double> p = {p0, p1, 1.0 - p0 - p1};
            const double obj = coupling_objective(r, p);
            if (obj < best_obj) {
                best_obj = obj;
                best = p;
            }
        }
    }
    return best;
}

// ------------------------------------------------------------ segmentation

struct EpisodeRef {
    std::int64_t start_ms, end_ms;
    bool over_length;
};

// Left-to-right reference packing, written independently of the library: for
// each episode, scan forward from scratch for the furthest cue that fits.
inline std::vector<EpisodeRef> segment_reference(const std::vector<CaptionCue>& cues,
                                                 std::int64_t budget_ms) {
    std::vector<EpisodeRef> out;
    std::size_t begin = 0;
    while (begin < cues.size()) {
        if (cues[begin].end_ms - cues[begin].start_ms > budget_ms) {
            out.push_back({cues[begin].start_ms, cues[begin].end_ms, true});
            ++begin;
            continue;
        }
        std::size_t last = begin;
        for (std::size_t probe = begin; probe < cues.size(); ++probe) {
            if (cues[probe].end_ms - cues[begin].start_ms <= budget_ms) last = probe;
            else break;
        }
        out.push_back({cues[begin].start_ms, cues[last].end_ms, false});
        begin = last + 1;
    }
    return out;
}

} // namespace mediaprof::oracle
