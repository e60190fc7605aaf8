#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mediaprof/ensemble.hpp"
#include "mediaprof/selection.hpp"
#include "testutil.hpp"

using namespace mediaprof;
using namespace mediaprof::test;

namespace {

PosteriorMatrix matrix_of(const std::string& id, const std::vector<std::vector<double>>& rows) {
    PosteriorMatrix m;
    m.model_id = id;
    m.classes = {0, 1, 2};
    m.probs = Matrix(rows.size(), 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m.ids.push_back("r" + std::to_string(i));
        std::copy(rows[i].begin(), rows[i].end(), m.probs.row(i).begin());
    }
    m.validate();
    return m;
}

// one-hot rows matching the gold labels
PosteriorMatrix perfect_matrix(const std::string& id, const std::vector<int>& gold) {
    std::vector<std::vector<double>> rows;
    for (int g : gold) {
        std::vector<double> r(3, 0.005);
        r[g] = 0.99;
        rows.push_back(r);
    }
    return matrix_of(id, rows);
}

PosteriorMatrix noise_matrix(const std::string& id, std::size_t n, std::uint64_t seed) {
    Gaussian g(seed);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> r(3);
        double sum = 0.0;
        for (auto& v : r) {
            v = 0.05 + g.uniform();
            sum += v;
        }
        for (auto& v : r) v /= sum;
        rows.push_back(r);
    }
    return matrix_of(id, rows);
}

} // namespace

TEST_CASE("combine with a degenerate weight vector returns that matrix exactly") {
    std::vector<int> gold = {0, 1, 2, 1, 0};
    std::vector<PosteriorMatrix> mats = {perfect_matrix("a", gold), noise_matrix("b", 5, 7)};
    PosteriorMatrix out = combine(mats, EnsembleWeights{{1.0, 0.0}});
    CHECK(out.probs.data == mats[0].probs.data);
    CHECK(out.ids == mats[0].ids);
}

TEST_CASE("combine averages rows") {
    auto a = matrix_of("a", {{1.0, 0.0, 0.0}});
    auto b = matrix_of("b", {{0.0, 1.0, 0.0}});
    PosteriorMatrix out = combine(std::vector<PosteriorMatrix>{a, b}, EnsembleWeights{{0.5, 0.5}});
    CHECK(out.probs.at(0, 0) == doctest::Approx(0.5));
    CHECK(out.probs.at(0, 1) == doctest::Approx(0.5));
    CHECK(out.probs.at(0, 2) == doctest::Approx(0.0));
}

TEST_CASE("uniform combine equals the unweighted mean") {
    std::vector<PosteriorMatrix> mats = {noise_matrix("a", 8, 1), noise_matrix("b", 8, 2),
                                         noise_matrix("c", 8, 3)};
    PosteriorMatrix out =
        combine(mats, EnsembleWeights{{1.0 / 3, 1.0 / 3, 1.0 / 3}});
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t c = 0; c < 3; ++c) {
            const double mean =
                (mats[0].probs.at(i, c) + mats[1].probs.at(i, c) + mats[2].probs.at(i, c)) / 3.0;
            CHECK(out.probs.at(i, c) == doctest::Approx(mean).epsilon(1e-12));
        }
}

TEST_CASE("combine validates alignment and weights") {
    auto a = matrix_of("a", {{1.0, 0.0, 0.0}});
    auto b = matrix_of("b", {{0.0, 1.0, 0.0}});
    auto c = b;
    c.ids[0] = "other";
    CHECK_THROWS_AS(combine(std::vector<PosteriorMatrix>{a, c}, EnsembleWeights{{0.5, 0.5}}),
                    ValidationError);
    CHECK_THROWS_AS(combine(std::vector<PosteriorMatrix>{a, b}, EnsembleWeights{{1.0}}),
                    ValidationError);
    CHECK_THROWS_AS(combine(std::vector<PosteriorMatrix>{a, b}, EnsembleWeights{{0.9, 0.2}}),
                    ValidationError);
    CHECK_THROWS_AS(combine(std::vector<PosteriorMatrix>{a, b}, EnsembleWeights{{1.5, -0.5}}),
                    ValidationError);
}

TEST_CASE("learn_weights puts the mass on the perfect model") {
    std::vector<int> gold;
    for (int i = 0; i < 60; ++i) gold.push_back(i % 3);
    std::vector<PosteriorMatrix> mats = {perfect_matrix("good", gold),
                                         noise_matrix("noise", gold.size(), 42)};
    EnsembleWeights w = learn_weights(mats, gold);
    CHECK(w.values[0] >= 0.5);

    PosteriorMatrix combined = combine(mats, w);
    Confusion confusion(3, std::vector<long>(3, 0));
    for (std::size_t i = 0; i < gold.size(); ++i)
        ++confusion[gold[i]][argmax_class(combined.probs.row(i), combined.classes)];
    CHECK(macro_f1(confusion) == doctest::Approx(1.0));
}

TEST_CASE("identical matrices tie toward uniform weights") {
    std::vector<int> gold = {0, 1, 2, 0, 1, 2};
    auto m = noise_matrix("a", gold.size(), 5);
    auto m2 = m;
    m2.model_id = "b";
    EnsembleWeights w = learn_weights(std::vector<PosteriorMatrix>{m, m2}, gold);
    CHECK(w.values[0] == doctest::Approx(0.5));
    CHECK(w.values[1] == doctest::Approx(0.5));
}

TEST_CASE("learned weights never lose to a single constituent") {
    std::vector<int> gold;
    for (int i = 0; i < 45; ++i) gold.push_back(i % 3);
    auto score = [&](const std::vector<PosteriorMatrix>& mats, const EnsembleWeights& w) {
        PosteriorMatrix combined = combine(mats, w);
        Confusion confusion(3, std::vector<long>(3, 0));
        for (std::size_t i = 0; i < gold.size(); ++i)
            ++confusion[gold[i]][argmax_class(combined.probs.row(i), combined.classes)];
        return macro_f1(confusion);
    };

    SUBCASE("lattice search (up to 4 models)") {
        std::vector<PosteriorMatrix> mats = {noise_matrix("a", gold.size(), 11),
                                             noise_matrix("b", gold.size(), 12),
                                             noise_matrix("c", gold.size(), 13)};
        EnsembleWeights w = learn_weights(mats, gold);
        const double combined = score(mats, w);
        for (std::size_t m = 0; m < mats.size(); ++m) {
            std::vector<double> corner(mats.size(), 0.0);
            corner[m] = 1.0;
            CHECK(combined >= score(mats, EnsembleWeights{corner}) - 1e-12);
        }
    }
    SUBCASE("coordinate ascent (more than 4 models)") {
        std::vector<PosteriorMatrix> mats;
        for (int m = 0; m < 6; ++m)
            mats.push_back(noise_matrix("m" + std::to_string(m), gold.size(), 20 + m));
        mats.push_back(perfect_matrix("good", gold));
        EnsembleWeights w = learn_weights(mats, gold);
        const double combined = score(mats, w);
        for (std::size_t m = 0; m < mats.size(); ++m) {
            std::vector<double> corner(mats.size(), 0.0);
            corner[m] = 1.0;
            CHECK(combined >= score(mats, EnsembleWeights{corner}) - 1e-12);
        }
    }
}

TEST_CASE("learn_weights input contracts") {
    std::vector<int> gold = {0, 1, 2};
    auto a = matrix_of("a", {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    auto b = matrix_of("b", {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    std::vector<PosteriorMatrix> mats = {a, b};
    LearnWeightsOptions opts;
    opts.step = 0.3; // does not divide 1
    CHECK_THROWS_AS(learn_weights(mats, gold, opts), ValidationError);
    CHECK_THROWS_AS(learn_weights(std::vector<PosteriorMatrix>{}, gold), ValidationError);
    CHECK_THROWS_AS(learn_weights(std::vector<PosteriorMatrix>{a}, gold), ValidationError);
    CHECK_THROWS_AS(learn_weights(mats, std::vector<int>{0, 1}), ValidationError);
}

TEST_CASE("argmax of a combined row ignores weight rescaling") {
    std::vector<int> gold = {0, 1, 2, 0, 1};
    std::vector<PosteriorMatrix> mats = {noise_matrix("a", gold.size(), 31),
                                         noise_matrix("b", gold.size(), 32)};
    const EnsembleWeights w{{0.3, 0.7}};
    PosteriorMatrix combined = combine(mats, w);
    // scaling both weights by 4 then renormalizing is a no-op
    PosteriorMatrix rescaled = combine(mats, EnsembleWeights{{1.2 / 4.0, 2.8 / 4.0}});
    for (std::size_t i = 0; i < gold.size(); ++i)
        CHECK(argmax_class(combined.probs.row(i), combined.classes) ==
              argmax_class(rescaled.probs.row(i), rescaled.classes));
}
