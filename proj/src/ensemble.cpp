#include "mediaprof/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "mediaprof/selection.hpp"

namespace mediaprof {

void PosteriorMatrix::validate() const {
    if (ids.size() != probs.rows)
        throw ValidationError("PosteriorMatrix: id/row count mismatch");
    if (classes.size() != probs.cols)
        throw ValidationError("PosteriorMatrix: class/column count mismatch");
    for (std::size_t i = 0; i < probs.rows; ++i) {
        double sum = 0.0;
        for (double v : probs.row(i)) {
            if (v < 0.0 || !std::isfinite(v))
                throw ValidationError("PosteriorMatrix: negative or non-finite probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw ValidationError("PosteriorMatrix: row for '" + ids[i] + "' sums to " +
                                  std::to_string(sum));
    }
}

nlohmann::json PosteriorMatrix::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < probs.rows; ++i) {
        auto r = probs.row(i);
        rows.push_back({{"medium_id", ids[i]},
                        {"p", std::vector<double>(r.begin(), r.end())}});
    }
    return {{"model_id", model_id}, {"classes", classes}, {"rows", rows}};
}

PosteriorMatrix PosteriorMatrix::from_json(const nlohmann::json& j) {
    PosteriorMatrix m;
    m.model_id = j.at("model_id").get<std::string>();
    m.classes = j.at("classes").get<std::vector<int>>();
    const auto& rows = j.at("rows");
    m.probs = Matrix(rows.size(), m.classes.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m.ids.push_back(rows[i].at("medium_id").get<std::string>());
        auto p = rows[i].at("p").get<std::vector<double>>();
        if (p.size() != m.classes.size()) throw ParseError("posterior row length mismatch");
        std::copy(p.begin(), p.end(), m.probs.row(i).begin());
    }
    m.validate();
    return m;
}

void EnsembleWeights::validate() const {
    if (values.empty()) throw ValidationError("EnsembleWeights: empty");
    double sum = 0.0;
    for (double w : values) {
        if (w < 0.0) throw ValidationError("EnsembleWeights: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("EnsembleWeights: weights sum to " + std::to_string(sum));
}

int argmax_class(std::span<const double> row, const std::vector<int>& classes) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c)
        if (row[c] > row[best]) best = c;
    return classes[best];
}

namespace {

void check_alignment(std::span<const PosteriorMatrix> mats) {
    if (mats.empty()) throw ValidationError("ensemble: no posterior matrices");
    for (std::size_t m = 1; m < mats.size(); ++m) {
        if (mats[m].ids != mats[0].ids)
            throw ValidationError("ensemble: matrices are not row-aligned");
        if (mats[m].classes != mats[0].classes)
            throw ValidationError("ensemble: matrices disagree on classes");
    }
}

} // namespace

PosteriorMatrix combine(std::span<const PosteriorMatrix> mats, const EnsembleWeights& weights) {
    check_alignment(mats);
    weights.validate();
    if (weights.values.size() != mats.size())
        throw ValidationError("combine: weight count != matrix count");
    PosteriorMatrix out;
    out.model_id = "ensemble";
    out.ids = mats[0].ids;
    out.classes = mats[0].classes;
    out.probs = Matrix(mats[0].probs.rows, mats[0].probs.cols);
    for (std::size_t m = 0; m < mats.size(); ++m) {
        const double w = weights.values[m];
        if (w == 0.0) continue;
        for (std::size_t i = 0; i < out.probs.data.size(); ++i)
            out.probs.data[i] += w * mats[m].probs.data[i];
    }
    return out;
}

namespace {

double score_weights(std::span<const PosteriorMatrix> mats, const std::vector<double>& w,
                     const std::vector<int>& gold) {
    const std::size_t rows = mats[0].probs.rows;
    const std::size_t k = mats[0].classes.size();
    Confusion confusion(k, std::vector<long>(k, 0));
    std::vector<double> acc(k);
    for (std::size_t i = 0; i < rows; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t m = 0; m < mats.size(); ++m) {
            if (w[m] == 0.0) continue;
            auto r = mats[m].probs.row(i);
            for (std::size_t c = 0; c < k; ++c) acc[c] += w[m] * r[c];
        }
        const int pred = argmax_class(acc, mats[0].classes);
        std::size_t ti = 0, pi = 0;
        for (std::size_t c = 0; c < k; ++c) {
            if (mats[0].classes[c] == gold[i]) ti = c;
            if (mats[0].classes[c] == pred) pi = c;
        }
        ++confusion[ti][pi];
    }
    return macro_f1(confusion);
}

double entropy(const std::vector<double>& w) {
    double h = 0.0;
    for (double v : w)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

// Enumerates all compositions of `total` into `parts` non-negative integers,
// lexicographically.
void enumerate_lattice(int total, int parts, std::vector<int>& current,
                       const std::function<void(const std::vector<int>&)>& visit) {
    if (parts == 1) {
        current.push_back(total);
        visit(current);
        current.pop_back();
        return;
    }
    for (int v = 0; v <= total; ++v) {
        current.push_back(v);
        enumerate_lattice(total - v, parts - 1, current, visit);
        current.pop_back();
    }
}

} // namespace

EnsembleWeights learn_weights(std::span<const PosteriorMatrix> mats, const std::vector<int>& gold,
                              const LearnWeightsOptions& opts) {
    check_alignment(mats);
    if (mats.size() < 2) throw ValidationError("learn_weights: need at least two matrices");
    if (gold.size() != mats[0].ids.size())
        throw ValidationError("learn_weights: gold labels misaligned with rows");
    const double n_steps_f = 1.0 / opts.step;
    const int n_steps = static_cast<int>(std::lround(n_steps_f));
    if (n_steps < 1 || std::abs(n_steps * opts.step - 1.0) > 1e-9)
        throw ValidationError("learn_weights: step must divide 1");

    const std::size_t m = mats.size();
    std::vector<double> best_w;
    double best_f1 = -1.0;
    double best_entropy = -1.0;

    auto consider = [&](const std::vector<double>& w) {
        const double f1 = score_weights(mats, w, gold);
        if (f1 > best_f1) {
            best_f1 = f1;
            best_w = w;
            best_entropy = entropy(w);
            return;
        }
        if (f1 == best_f1) {
            const double h = entropy(w);
            if (h > best_entropy) {
                best_w = w;
                best_entropy = h;
            }
            // equal entropy: enumeration order is lexicographic, keep first
        }
    };

    if (static_cast<int>(m) <= opts.lattice_max_models) {
        std::vector<int> counts;
        std::vector<double> w(m);
        enumerate_lattice(n_steps, static_cast<int>(m), counts,
                          [&](const std::vector<int>& c) {
                              for (std::size_t i = 0; i < m; ++i)
                                  w[i] = static_cast<double>(c[i]) * opts.step;
                              consider(w);
                          });
    } else {
        std::vector<int> counts(m, 0);
        // start as close to uniform as the lattice allows
        const int base = n_steps / static_cast<int>(m);
        int rem = n_steps - base * static_cast<int>(m);
        for (std::size_t i = 0; i < m; ++i) counts[i] = base + (static_cast<int>(i) < rem ? 1 : 0);

        auto as_weights = [&](const std::vector<int>& c) {
            std::vector<double> w(m);
            for (std::size_t i = 0; i < m; ++i) w[i] = static_cast<double>(c[i]) * opts.step;
            return w;
        };
        consider(as_weights(counts));
        // Corner weights keep the single-model scores inside the search space.
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<int> corner(m, 0);
            corner[i] = n_steps;
            consider(as_weights(corner));
        }
        for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
            double sweep_best = best_f1;
            std::vector<int> sweep_move;
            for (std::size_t from = 0; from < m; ++from) {
                if (counts[from] == 0) continue;
                for (std::size_t to = 0; to < m; ++to) {
                    if (to == from) continue;
                    std::vector<int> cand = counts;
                    --cand[from];
                    ++cand[to];
                    const double f1 = score_weights(mats, as_weights(cand), gold);
                    if (f1 > sweep_best) {
                        sweep_best = f1;
                        sweep_move = cand;
                    }
                }
            }
            if (sweep_move.empty()) break;
            counts = sweep_move;
            consider(as_weights(counts));
        }
    }

    EnsembleWeights out{best_w};
    out.validate();
    return out;
}

} // namespace mediaprof
