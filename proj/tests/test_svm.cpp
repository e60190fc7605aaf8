#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "mediaprof/svm.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace mediaprof;
using namespace mediaprof::test;

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.at(0).size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    return m;
}

} // namespace

TEST_CASE("rbf kernel: unit diagonal, symmetry, PSD quadratic forms") {
    Gaussian g(11);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 12, d = 4;
        Matrix x(n, d);
        for (auto& v : x.data) v = g();
        const double gamma = 0.5;
        std::vector<std::vector<double>> k(n, std::vector<double>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) k[i][j] = rbf_kernel(x.row(i), x.row(j), gamma);
        for (int i = 0; i < n; ++i) {
            CHECK(k[i][i] == doctest::Approx(1.0));
            for (int j = 0; j < n; ++j) CHECK(k[i][j] == doctest::Approx(k[j][i]).epsilon(1e-12));
        }
        // z'Kz >= 0 for random z
        for (int rep = 0; rep < 10; ++rep) {
            std::vector<double> z(n);
            for (auto& v : z) v = g();
            double quad = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) quad += z[i] * k[i][j] * z[j];
            CHECK(quad >= -1e-8);
        }
    }
}

TEST_CASE("two-point problem: both points become support vectors, signs separate") {
    const Matrix x = from_rows({{0.0}, {1.0}});
    const std::vector<int> y = {-1, 1};
    BinarySvm model = train_binary(x, y, 10.0, KernelSpec{10.0});
    CHECK(model.support_vectors().rows == 2);
    CHECK(model.decision(std::vector<double>{0.0}) < 0.0);
    CHECK(model.decision(std::vector<double>{1.0}) > 0.0);
    // margin: y*f at the support vectors is 1 within tolerance
    CHECK(std::fabs(-model.decision(std::vector<double>{0.0}) - 1.0) < 2e-3);
    CHECK(std::fabs(model.decision(std::vector<double>{1.0}) - 1.0) < 2e-3);
    // midpoint is equidistant in kernel space, so the decision reduces to the
    // bias, which symmetry pins near zero
    CHECK(std::fabs(model.decision(std::vector<double>{0.5})) < 1e-6);
}

TEST_CASE("xor problem is fit exactly with rbf") {
    const Matrix x = from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    const std::vector<int> y = {-1, 1, 1, -1};
    BinarySvm model = train_binary(x, y, 10.0, KernelSpec{1.0});
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(model.decision(x.row(i)) * y[i] > 0.0);

    auto sol = oracle::solve_svm_dual_qp(x, y, 10.0, 1.0);
    CHECK(model.dual_objective ==
          doctest::Approx(sol.objective).epsilon(1e-4));
}

TEST_CASE("smo matches the dense qp oracle on gaussian blobs") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        Blobs b = make_blobs(2, 10, 3, 3.0, 0.8, seed);
        std::vector<int> y;
        for (int c : b.y) y.push_back(c == 0 ? -1 : 1);
        for (double cost : {1.0, 10.0}) {
            BinarySvm model = train_binary(b.x, y, cost, KernelSpec{0.5});
            auto sol = oracle::solve_svm_dual_qp(b.x, y, cost, 0.5);
            CHECK(std::fabs(model.dual_objective - sol.objective) <=
                  1e-4 * std::max(1.0, std::fabs(sol.objective)));
            for (std::size_t i = 0; i < b.x.rows; ++i) {
                const double f_model = model.decision(b.x.row(i));
                const double f_oracle = oracle::qp_decision(b.x, y, sol, 0.5, b.x.row(i));
                CHECK((f_model > 0) == (f_oracle > 0));
            }
        }
    }
}

TEST_CASE("kkt conditions hold at the returned solution") {
    Blobs b = make_blobs(2, 15, 4, 2.5, 1.0, 42);
    std::vector<int> y;
    for (int c : b.y) y.push_back(c == 0 ? -1 : 1);
    const double cost = 5.0, tol = 1e-3;
    BinarySvm model = train_binary(b.x, y, cost, KernelSpec{0.3}, SmoOptions{tol});

    // reconstruct alpha from the dual coefficients
    double coef_sum = 0.0;
    for (std::size_t k = 0; k < model.dual_coef().size(); ++k) {
        const double a = std::fabs(model.dual_coef()[k]);
        CHECK(a >= 0.0);
        CHECK(a <= cost * (1 + 1e-9));
        coef_sum += model.dual_coef()[k];
    }
    CHECK(std::fabs(coef_sum) < 1e-8);

    // margin support vectors satisfy y f = 1 within tol
    for (std::size_t k = 0; k < model.support_vectors().rows; ++k) {
        const double a = std::fabs(model.dual_coef()[k]);
        if (a > 1e-9 && a < cost - 1e-9) {
            const double yk = model.dual_coef()[k] > 0 ? 1.0 : -1.0;
            const double f = model.decision(model.support_vectors().row(k));
            CHECK(std::fabs(yk * f - 1.0) <= tol + 1e-6);
        }
    }
}

TEST_CASE("contract violations are rejected") {
    const Matrix x = from_rows({{0.0}, {1.0}});
    CHECK_THROWS_AS(train_binary(x, std::vector<int>{1, 1}, 1.0, KernelSpec{1.0}),
                    ValidationError);
    CHECK_THROWS_AS(train_binary(x, std::vector<int>{1, -1}, -1.0, KernelSpec{1.0}),
                    ValidationError);
    CHECK_THROWS_AS(train_binary(x, std::vector<int>{1, -1}, 1.0, KernelSpec{-2.0}),
                    ValidationError);
    CHECK_THROWS_AS(BinarySvm(Matrix(0, 1), {}, 0.0, KernelSpec{1.0}, 1.0), ValidationError);

    BinarySvm model = train_binary(x, std::vector<int>{-1, 1}, 1.0, KernelSpec{1.0});
    CHECK_THROWS_AS(model.decision(std::vector<double>{1.0, 2.0}), ValidationError);
}

TEST_CASE("non-convergence raises an error carrying the best iterate") {
    Blobs b = make_blobs(2, 20, 3, 1.0, 1.5, 7);
    std::vector<int> y;
    for (int c : b.y) y.push_back(c == 0 ? -1 : 1);
    SmoOptions opts;
    opts.max_iterations = 3;
    try {
        train_binary(b.x, y, 10.0, KernelSpec{0.5}, opts);
        FAIL("expected SmoNonConvergence");
    } catch (const SmoNonConvergence& e) {
        CHECK(e.iterations() == 3);
        CHECK(e.kkt_violations() > 0);
        REQUIRE(e.best_iterate() != nullptr);
        CHECK(e.best_iterate()->support_vectors().rows > 0);
    }
}

TEST_CASE("duplicating every training point leaves predictions unchanged") {
    Blobs b = make_blobs(2, 8, 3, 3.0, 0.7, 99);
    std::vector<int> y;
    for (int c : b.y) y.push_back(c == 0 ? -1 : 1);
    BinarySvm base = train_binary(b.x, y, 2.0, KernelSpec{0.5});

    Matrix doubled(b.x.rows * 2, b.x.cols);
    std::vector<int> y2;
    for (std::size_t i = 0; i < b.x.rows; ++i) {
        std::copy(b.x.row(i).begin(), b.x.row(i).end(), doubled.row(2 * i).begin());
        std::copy(b.x.row(i).begin(), b.x.row(i).end(), doubled.row(2 * i + 1).begin());
        y2.push_back(y[i]);
        y2.push_back(y[i]);
    }
    BinarySvm twice = train_binary(doubled, y2, 2.0, KernelSpec{0.5});
    Gaussian g(5);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<double> p = {3.0 * g(), 3.0 * g(), 3.0 * g()};
        CHECK((base.decision(p) > 0) == (twice.decision(p) > 0));
    }
}

TEST_CASE("increasing C on separable data never increases training error") {
    Blobs b = make_blobs(2, 12, 3, 4.0, 0.5, 123);
    std::vector<int> y;
    for (int c : b.y) y.push_back(c == 0 ? -1 : 1);
    long prev_errors = static_cast<long>(b.x.rows);
    for (double cost : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        BinarySvm model = train_binary(b.x, y, cost, KernelSpec{0.5});
        long errors = 0;
        for (std::size_t i = 0; i < b.x.rows; ++i)
            if ((model.decision(b.x.row(i)) > 0 ? 1 : -1) != y[i]) ++errors;
        CHECK(errors <= prev_errors);
        prev_errors = errors;
    }
}

TEST_CASE("example-order permutation changes decisions by at most 1e-6") {
    // The dual optimum is unique (strictly PD Gram on distinct points), so at
    // a tight stopping tolerance the decision function is order-independent;
    // at the default tolerance only up to O(tol).
    Blobs b = make_blobs(2, 12, 3, 2.5, 0.9, 31);
    std::vector<int> y;
    for (int c : b.y) y.push_back(c == 0 ? -1 : 1);
    SmoOptions tight;
    tight.tol = 1e-8;
    tight.max_iterations = 2000000;
    BinarySvm base = train_binary(b.x, y, 3.0, KernelSpec{0.4}, tight);

    std::vector<std::size_t> perm(b.x.rows);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::mt19937_64 rng(8);
    deterministic_shuffle(perm, rng);
    Matrix px(b.x.rows, b.x.cols);
    std::vector<int> py(b.x.rows);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        std::copy(b.x.row(perm[i]).begin(), b.x.row(perm[i]).end(), px.row(i).begin());
        py[i] = y[perm[i]];
    }
    BinarySvm permuted = train_binary(px, py, 3.0, KernelSpec{0.4}, tight);
    for (std::size_t i = 0; i < b.x.rows; ++i)
        CHECK(std::fabs(base.decision(b.x.row(i)) - permuted.decision(b.x.row(i))) <= 1e-6);

    // at the default tolerance the signs still agree everywhere
    BinarySvm loose_a = train_binary(b.x, y, 3.0, KernelSpec{0.4});
    BinarySvm loose_b = train_binary(px, py, 3.0, KernelSpec{0.4});
    for (std::size_t i = 0; i < b.x.rows; ++i)
        CHECK((loose_a.decision(b.x.row(i)) > 0) == (loose_b.decision(b.x.row(i)) > 0));
}

TEST_CASE("kernel cache size does not affect the result") {
    Blobs b = make_blobs(2, 15, 4, 2.0, 1.0, 77);
    std::vector<int> y;
    for (int c : b.y) y.push_back(c == 0 ? -1 : 1);
    SmoOptions small, large;
    small.cache_rows = 2;
    large.cache_rows = 4096;
    BinarySvm a = train_binary(b.x, y, 4.0, KernelSpec{0.3}, small);
    BinarySvm c = train_binary(b.x, y, 4.0, KernelSpec{0.3}, large);
    CHECK(a.dual_objective == doctest::Approx(c.dual_objective).epsilon(1e-12));
    for (std::size_t i = 0; i < b.x.rows; ++i)
        CHECK(a.decision(b.x.row(i)) == doctest::Approx(c.decision(b.x.row(i))).epsilon(1e-12));
}

TEST_CASE("standard scaler: zero mean, unit variance, constant columns pass through") {
    Matrix x = from_rows({{1.0, 5.0, 2.0}, {3.0, 5.0, 4.0}, {5.0, 5.0, 9.0}});
    StandardScaler s = StandardScaler::fit(x);
    CHECK(s.mean[1] == doctest::Approx(5.0));
    CHECK(s.scale[1] == 1.0); // zero variance
    Matrix z = s.transform(x);
    for (std::size_t j : {0u, 2u}) {
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < 3; ++i) mean += z.at(i, j);
        mean /= 3;
        for (std::size_t i = 0; i < 3; ++i) var += (z.at(i, j) - mean) * (z.at(i, j) - mean);
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(var / 3 == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(z.at(0, 1) == 0.0);
}

TEST_CASE("one-vs-one multiclass: three separable blobs train clean") {
    Blobs b = make_blobs(3, 10, 4, 4.0, 0.6, 17);
    MulticlassSvm model = train_multiclass(b.x, b.y, 10.0, KernelSpec{0.5});
    CHECK(model.pairs().size() == 3);
    CHECK(model.classes() == std::vector<int>{0, 1, 2});
    long correct = 0;
    for (std::size_t i = 0; i < b.x.rows; ++i)
        if (model.predict(b.x.row(i)) == b.y[i]) ++correct;
    CHECK(correct == static_cast<long>(b.x.rows));
    CHECK(model.decision_all(b.x.row(0)).size() == 3);
}

TEST_CASE("two-class multiclass reduces to the binary sign rule") {
    Blobs b = make_blobs(2, 10, 3, 3.0, 0.8, 55);
    MulticlassSvm model = train_multiclass(b.x, b.y, 5.0, KernelSpec{0.5});
    std::vector<int> y_signed;
    for (int c : b.y) y_signed.push_back(c == 0 ? 1 : -1); // pair (0,1): 0 is positive
    BinarySvm binary = train_binary(b.x, y_signed, 5.0, KernelSpec{0.5});
    Gaussian g(3);
    for (int rep = 0; rep < 40; ++rep) {
        std::vector<double> p = {4.0 * g(), 4.0 * g(), 4.0 * g()};
        const int vote = model.predict(p);
        const int sign = binary.decision(p) > 0 ? 0 : 1;
        CHECK(vote == sign);
    }
}

TEST_CASE("vote ties fall back to summed decisions, then the smallest code") {
    // Hand-built pairwise models whose decisions at the probe are exactly the
    // bias: the two support vectors sit symmetrically around the probe, so
    // their kernel terms cancel.
    const std::vector<double> probe = {0.0};
    auto pair_model = [&](int pos, int neg, double bias) {
        Matrix sv(2, 1);
        sv.at(0, 0) = 1.0;
        sv.at(1, 0) = -1.0;
        return PairwiseModel{pos, neg, BinarySvm(sv, {0.25, -0.25}, bias, KernelSpec{1.0}, 1.0),
                             std::nullopt};
    };
    // cyclic votes (one each); margins: class0 = 0.5-1.0 = -0.5,
    // class1 = -0.5+0.75 = 0.25, class2 = 1.0-0.75 = 0.25 (exact in binary)
    std::vector<PairwiseModel> pairs;
    pairs.push_back(pair_model(0, 1, 0.5));   // votes 0
    pairs.push_back(pair_model(0, 2, -1.0));  // votes 2
    pairs.push_back(pair_model(1, 2, 0.75));  // votes 1
    MulticlassSvm model({0, 1, 2}, std::move(pairs), 1);
    CHECK(model.decision_all(probe) == std::vector<double>{0.5, -1.0, 0.75});
    CHECK(model.predict(probe) == 1); // margin tie between 1 and 2 -> smaller code
}

TEST_CASE("single-class multiclass input is rejected") {
    Matrix x = from_rows({{0.0}, {1.0}});
    CHECK_THROWS_AS(train_multiclass(x, std::vector<int>{1, 1}, 1.0, KernelSpec{1.0}),
                    ValidationError);
}

TEST_CASE("model serialization round trip is prediction-exact") {
    Blobs b = make_blobs(3, 8, 4, 3.5, 0.7, 29);
    TrainedModel model;
    model.task = "bias";
    model.feature_ids = {"articles.enc"};
    model.cost = 10.0;
    model.kernel = KernelSpec{0.25};
    model.scaler = StandardScaler::fit(b.x);
    MulticlassOptions opts;
    opts.calibrate = true;
    model.svm = train_multiclass(model.scaler.transform(b.x), b.y, model.cost, model.kernel, opts);

    TempDir dir;
    model.save(dir / "model.json");
    TrainedModel loaded = TrainedModel::load(dir / "model.json");
    CHECK(loaded.task == model.task);
    CHECK(loaded.feature_ids == model.feature_ids);

    Gaussian g(9);
    for (int rep = 0; rep < 25; ++rep) {
        std::vector<double> p(4);
        for (auto& v : p) v = 4.0 * g();
        CHECK(model.predict(p) == loaded.predict(p));
        const auto p1 = model.predict_probabilities(p);
        const auto p2 = loaded.predict_probabilities(p);
        REQUIRE(p1.size() == p2.size());
        for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i] == p2[i]);
    }
}
