#include <catch2/catch.hpp>

#include <algorithm>
#include <numeric>

#include "vaereg/baselines.hpp"
#include "vaereg/metrics.hpp"
#include "vaereg/rng.hpp"

using namespace vaereg;

namespace {

// Plain gradient descent on the ridge objective; independent of the
// normal-equation path it checks.
LinearModel descent_oracle(const Tensor& x, const std::vector<double>& y, double alpha,
                           std::size_t iters = 200000, double lr = 5e-3) {
    const std::size_t n = x.rows(), d = x.cols();
    std::vector<double> beta(d, 0.0);
    double b0 = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        std::vector<double> g(d, 0.0);
        double gb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double pred = b0;
            for (std::size_t j = 0; j < d; ++j) pred += beta[j] * x(i, j);
            const double r = pred - y[i];
            for (std::size_t j = 0; j < d; ++j) g[j] += 2.0 * r * x(i, j);
            gb += 2.0 * r;
        }
        for (std::size_t j = 0; j < d; ++j) g[j] += 2.0 * alpha * beta[j];
        for (std::size_t j = 0; j < d; ++j) beta[j] -= lr * g[j] / static_cast<double>(n);
        b0 -= lr * gb / static_cast<double>(n);
    }
    LinearModel m;
    m.coefficients = beta;
    m.intercept = b0;
    m.l2_alpha = alpha;
    m.fitted = true;
    return m;
}

}  // namespace

TEST_CASE("fit_linear recovers exact linear data") {
    Tensor x = Tensor::matrix(20, 1);
    std::vector<double> y(20);
    for (std::size_t i = 0; i < 20; ++i) {
        x(i, 0) = static_cast<double>(i) - 9.5;
        y[i] = 2.0 * x(i, 0);
    }
    const LinearModel m = fit_linear(x, y, 0.0);
    REQUIRE(m.coefficients[0] == Approx(2.0).margin(1e-8));
    REQUIRE(m.intercept == Approx(0.0).margin(1e-8));
}

TEST_CASE("huge alpha shrinks to the mean predictor") {
    Rng rng(15);
    Tensor x = Tensor::matrix(30, 2);
    std::vector<double> y(30);
    for (std::size_t i = 0; i < 30; ++i) {
        x(i, 0) = rng.uniform(-2, 2);
        x(i, 1) = rng.uniform(-2, 2);
        y[i] = 3.0 + x(i, 0) - 0.5 * x(i, 1) + 0.05 * rng.normal();
    }
    const LinearModel m = fit_linear(x, y, 1e12);
    REQUIRE(std::abs(m.coefficients[0]) < 1e-8);
    REQUIRE(std::abs(m.coefficients[1]) < 1e-8);
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 30.0;
    REQUIRE(m.intercept == Approx(mean).margin(1e-6));
}

TEST_CASE("ridge matches a descent oracle on a random 20x3 system") {
    Rng rng(8);
    Tensor x = Tensor::matrix(20, 3);
    std::vector<double> y(20);
    for (std::size_t i = 0; i < 20; ++i) {
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = rng.uniform(-1.5, 1.5);
        y[i] = 0.8 * x(i, 0) - 1.1 * x(i, 1) + 0.3 * x(i, 2) + 0.2 * rng.normal();
    }
    for (double alpha : {0.0, 3.7}) {
        const LinearModel exact = fit_linear(x, y, alpha);
        const LinearModel gd = descent_oracle(x, y, alpha);
        for (std::size_t j = 0; j < 3; ++j)
            REQUIRE(exact.coefficients[j] == Approx(gd.coefficients[j]).margin(1e-4));
        REQUIRE(exact.intercept == Approx(gd.intercept).margin(1e-4));
    }
}

TEST_CASE("least-squares residuals are orthogonal to the design") {
    Rng rng(27);
    const std::size_t n = 40, d = 4;
    Tensor x = Tensor::matrix(n, d);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.normal();
        y[i] = rng.normal();
    }
    const LinearModel m = fit_linear(x, y, 0.0);
    const std::vector<double> pred = m.predict(x);
    for (std::size_t j = 0; j < d; ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += x(i, j) * (y[i] - pred[i]);
        REQUIRE(std::abs(dot) < 1e-6);
    }
}

TEST_CASE("ridge predictions vary continuously with alpha") {
    Rng rng(5);
    Tensor x = Tensor::matrix(25, 2);
    std::vector<double> y(25);
    for (std::size_t i = 0; i < 25; ++i) {
        x(i, 0) = rng.uniform(-1, 1);
        x(i, 1) = rng.uniform(-1, 1);
        y[i] = x(i, 0) + 0.1 * rng.normal();
    }
    const std::vector<double> query{0.4, -0.3};
    for (double alpha : {1e-3, 1e-1, 1.0, 10.0, 100.0}) {
        const double p1 = fit_linear(x, y, alpha).predict_row(query);
        const double p2 = fit_linear(x, y, alpha * (1.0 + 1e-7)).predict_row(query);
        REQUIRE(std::abs(p1 - p2) < 1e-5);
    }
}

TEST_CASE("fit_linear rejects empty input") {
    REQUIRE_THROWS_AS(fit_linear(Tensor::matrix(3, 2), std::vector<double>{1.0, 2.0}, 0.0), DataError);
}

TEST_CASE("knn degenerate and exact-hit cases") {
    Tensor x = Tensor::from_rows({{0.0}, {1.0}, {2.0}, {3.0}});
    const std::vector<double> y{10.0, 20.0, 30.0, 40.0};

    const KnnModel all = fit_knn(x, y, 4);
    REQUIRE(predict_knn(all, std::vector<double>{1.4}) == Approx(25.0));

    const KnnModel one = fit_knn(x, y, 1);
    REQUIRE(predict_knn(one, std::vector<double>{2.0}) == 30.0);

    REQUIRE_THROWS_AS(fit_knn(x, y, 5), ConfigError);
    REQUIRE_THROWS_AS(fit_knn(x, y, 0), ConfigError);
}

TEST_CASE("knn ties break toward the lower training index") {
    // Query equidistant from rows 0 and 1; k = 1 must pick row 0.
    Tensor x = Tensor::from_rows({{1.0}, {-1.0}, {5.0}});
    const std::vector<double> y{100.0, 200.0, 300.0};
    const KnnModel m = fit_knn(x, y, 1);
    REQUIRE(predict_knn(m, std::vector<double>{0.0}) == 100.0);
}

TEST_CASE("knn matches an exhaustive oracle on 50 random points") {
    Rng rng(31);
    const std::size_t n = 50, d = 3, k = 5;
    Tensor x = Tensor::matrix(n, d);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.uniform(-2, 2);
        y[i] = rng.uniform(0, 10);
    }
    const KnnModel m = fit_knn(x, y, k);
    for (int rep = 0; rep < 25; ++rep) {
        std::vector<double> q(d);
        for (double& v : q) v = rng.uniform(-2, 2);

        // Independent oracle: full stable sort over (distance, index).
        std::vector<std::pair<double, std::size_t>> all(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += (x(i, j) - q[j]) * (x(i, j) - q[j]);
            all[i] = {s, i};
        }
        std::stable_sort(all.begin(), all.end());
        double expect = 0.0;
        for (std::size_t i = 0; i < k; ++i) expect += y[all[i].second];
        expect /= k;

        REQUIRE(predict_knn(m, q) == Approx(expect).margin(1e-12));
    }
}

TEST_CASE("knn prediction is invariant to training order away from ties") {
    Rng rng(77);
    const std::size_t n = 30;
    Tensor x = Tensor::matrix(n, 2);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = rng.uniform(-3, 3);
        x(i, 1) = rng.uniform(-3, 3);
        y[i] = rng.uniform(0, 1);
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::reverse(perm.begin(), perm.end());
    Tensor xp = Tensor::matrix(n, 2);
    std::vector<double> yp(n);
    for (std::size_t i = 0; i < n; ++i) {
        xp(i, 0) = x(perm[i], 0);
        xp(i, 1) = x(perm[i], 1);
        yp[i] = y[perm[i]];
    }
    const KnnModel a = fit_knn(x, y, 3);
    const KnnModel b = fit_knn(xp, yp, 3);
    const std::vector<double> q{0.123, -0.456};  // generic query, no exact ties
    REQUIRE(predict_knn(a, q) == Approx(predict_knn(b, q)).margin(1e-12));
}

TEST_CASE("nn regressor zero-epoch fit predicts the zero-initialized constant") {
    Rng rng(3);
    Tensor x = Tensor::matrix(10, 3);
    std::vector<double> y(10);
    for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = rng.uniform(-1, 1);
        y[i] = rng.uniform(-1, 1);
    }
    NnRegressorConfig cfg;
    cfg.trunk_dims = {8, 4};
    cfg.epochs = 0;
    cfg.batch_size = 5;
    const NnRegressor m = fit_nn_regressor(x, y, cfg);
    for (double p : m.predict(x)) REQUIRE(p == 0.0);
}

TEST_CASE("nn regressor fits noiseless linear data") {
    Rng rng(10);
    const std::size_t n = 120;
    Tensor x = Tensor::matrix(n, 3);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = rng.uniform(-1.5, 1.5);
        y[i] = 0.9 * x(i, 0) - 0.6 * x(i, 1) + 0.3 * x(i, 2);
    }
    NnRegressorConfig cfg;
    cfg.trunk_dims = {16, 8};
    cfg.epochs = 300;
    cfg.batch_size = 32;
    cfg.seed = 42;
    const NnRegressor m = fit_nn_regressor(x, y, cfg);

    // Held-out grid points from the same function.
    Tensor xt = Tensor::matrix(40, 3);
    std::vector<double> yt(40);
    Rng rng2(11);
    for (std::size_t i = 0; i < 40; ++i) {
        for (std::size_t j = 0; j < 3; ++j) xt(i, j) = rng2.uniform(-1.2, 1.2);
        yt[i] = 0.9 * xt(i, 0) - 0.6 * xt(i, 1) + 0.3 * xt(i, 2);
    }
    REQUIRE(r2_score(yt, m.predict(xt)) > 0.99);

    // Determinism under a fixed seed.
    const NnRegressor m2 = fit_nn_regressor(x, y, cfg);
    REQUIRE(m.predict(xt) == m2.predict(xt));
}

TEST_CASE("unfitted models refuse to predict") {
    NnRegressor nn;
    REQUIRE_THROWS_AS(nn.predict(Tensor::matrix(1, 2)), TrainingError);
    KnnModel knn;
    REQUIRE_THROWS_AS(predict_knn(knn, std::vector<double>{0.0}), TrainingError);
    LinearModel lm;
    REQUIRE_THROWS_AS(lm.predict_row(std::vector<double>{0.0}), TrainingError);
}
