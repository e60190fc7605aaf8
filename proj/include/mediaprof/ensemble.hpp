#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mediaprof/errors.hpp"
#include "mediaprof/util.hpp"

namespace mediaprof {

// Class posteriors for a set of media, produced by one model. Rows follow
// `ids`; every row sums to 1.
struct PosteriorMatrix {
    std::string model_id;
    std::vector<std::string> ids;
    std::vector<int> classes;
    Matrix probs;

    void validate() const;
    nlohmann::json to_json() const;
    static PosteriorMatrix from_json(const nlohmann::json& j);
};

struct EnsembleWeights {
    std::vector<double> values; // non-negative, sum 1

    void validate() const;
};

// Row-wise convex combination of aligned posterior matrices.
PosteriorMatrix combine(std::span<const PosteriorMatrix> mats, const EnsembleWeights& weights);

struct LearnWeightsOptions {
    double step = 0.05;
    int max_sweeps = 200;   // coordinate-ascent bound when > lattice_max_models
    int lattice_max_models = 4;
};

// Picks the weight vector maximizing macro-F1 of argmax(combined) against the
// gold labels: exhaustive simplex-lattice search for few models, coordinate
// ascent from uniform otherwise. Ties prefer maximum-entropy weights, then
// lexicographic order.
EnsembleWeights learn_weights(std::span<const PosteriorMatrix> mats, const std::vector<int>& gold,
                              const LearnWeightsOptions& opts = {});

// argmax with smallest-index tie-break, as used for ensemble predictions.
int argmax_class(std::span<const double> row, const std::vector<int>& classes);

} // namespace mediaprof
