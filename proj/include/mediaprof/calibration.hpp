#pragma once

#include <span>
#include <vector>

#include "mediaprof/errors.hpp"

namespace mediaprof {

class MulticlassSvm;

// Two-parameter sigmoid p(y=+1|f) = 1 / (1 + exp(A*f + B)).
struct PlattCalibrator {
    double A = 0.0;
    double B = 0.0;

    double probability(double decision) const;

    bool operator==(const PlattCalibrator&) const = default;
};

struct PlattOptions {
    int max_iterations = 100;
    int max_halvings = 20;
    double gradient_tol = 1e-8;
};

// Maximum-likelihood sigmoid fit on decision values with smoothed targets
// t+ = (N+ + 1)/(N+ + 2), t- = 1/(N- + 2); damped Newton with backtracking.
// Labels are +1/-1 and both signs must be present.
PlattCalibrator fit_platt(std::span<const double> decisions, std::span<const int> labels,
                          const PlattOptions& opts = {});

// Negative log-likelihood of the sigmoid (A,B) under the smoothed targets;
// the quantity fit_platt minimizes.
double platt_nll(double A, double B, std::span<const double> decisions, std::span<const int> labels);

// Pairwise coupling: given the full K x K matrix of pairwise probabilities
// r[i][j] = P(class i beats class j), with r[j][i] = 1 - r[i][j], returns the
// class posterior minimizing sum_{i!=j} (r_ji p_i - r_ij p_j)^2 over the
// simplex, via sweep-and-normalize iteration to a fixed point.
std::vector<double> couple_pairwise(const std::vector<std::vector<double>>& r,
                                    double sweep_tol = 1e-10, int max_sweeps = 10000);

// Calibrated class posterior of a one-vs-one model: per-pair sigmoids feed the
// pairwise-coupling solve. Requires every pair to carry a fitted calibrator.
std::vector<double> predict_proba(const MulticlassSvm& model, std::span<const double> x);

} // namespace mediaprof
