#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vaereg/adam.hpp"
#include "vaereg/dense.hpp"
#include "vaereg/errors.hpp"
#include "vaereg/rng.hpp"
#include "vaereg/tensor.hpp"
#include "vaereg/train.hpp"

namespace vaereg {

namespace detail {

// Cholesky factorization/solve for symmetric positive-definite systems.
// Returns false if a pivot is not strictly positive.
inline bool cholesky_solve(std::vector<double> a, std::size_t n, std::vector<double> rhs,
                           std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (!(s > 0.0)) return false;
                a[i * n + j] = std::sqrt(s);
            } else {
                a[i * n + j] = s / a[j * n + j];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * rhs[k];
        rhs[i] = s / a[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * rhs[k];
        rhs[i] = s / a[i * n + i];
    }
    out = std::move(rhs);
    return true;
}

}  // namespace detail

// Ordinary / ridge least squares with an unpenalized intercept.
struct LinearModel {
    std::vector<double> coefficients;
    double intercept = 0.0;
    double l2_alpha = 0.0;
    bool fitted = false;

    double predict_row(std::span<const double> x) const {
        if (!fitted) throw TrainingError("linear model is not fitted");
        if (x.size() != coefficients.size()) throw DimensionError("linear predict: feature count mismatch");
        double y = intercept;
        for (std::size_t j = 0; j < x.size(); ++j) y += coefficients[j] * x[j];
        return y;
    }

    std::vector<double> predict(const Tensor& x) const {
        std::vector<double> out(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i)
            out[i] = predict_row(std::span<const double>(x.row_data(i), x.cols()));
        return out;
    }
};

// Solves min ||y - X b - b0||^2 + alpha ||b||^2 by normal equations on
// centered data, which leaves the intercept unpenalized. A singular
// unregularized system falls back to a 1e-10 diagonal jitter.
inline LinearModel fit_linear(const Tensor& x, std::span<const double> y, double alpha = 0.0) {
    if (x.rank() != 2 || x.rows() == 0 || x.rows() != y.size())
        throw DataError("fit_linear: empty dataset or row/target mismatch");
    if (alpha < 0.0) throw ConfigError("fit_linear: alpha must be >= 0");
    const std::size_t n = x.rows(), d = x.cols();

    std::vector<double> xm(d, 0.0);
    double ym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x.row_data(i);
        for (std::size_t j = 0; j < d; ++j) xm[j] += row[j];
        ym += y[i];
    }
    for (double& v : xm) v /= static_cast<double>(n);
    ym /= static_cast<double>(n);

    std::vector<double> gram(d * d, 0.0), rhs(d, 0.0);
    std::vector<double> xc(d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x.row_data(i);
        for (std::size_t j = 0; j < d; ++j) xc[j] = row[j] - xm[j];
        const double yc = y[i] - ym;
        for (std::size_t j = 0; j < d; ++j) {
            rhs[j] += xc[j] * yc;
            for (std::size_t k = 0; k <= j; ++k) gram[j * d + k] += xc[j] * xc[k];
        }
    }
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = j + 1; k < d; ++k) gram[j * d + k] = gram[k * d + j];
    for (std::size_t j = 0; j < d; ++j) gram[j * d + j] += alpha;

    LinearModel m;
    m.l2_alpha = alpha;
    if (!detail::cholesky_solve(gram, d, rhs, m.coefficients)) {
        for (std::size_t j = 0; j < d; ++j) gram[j * d + j] += 1e-10;
        if (!detail::cholesky_solve(gram, d, rhs, m.coefficients))
            throw TrainingError("fit_linear: normal equations are singular");
    }
    m.intercept = ym;
    for (std::size_t j = 0; j < d; ++j) m.intercept -= m.coefficients[j] * xm[j];
    m.fitted = true;
    return m;
}

// k-nearest-neighbour regression; distance ties break by ascending training
// index.
struct KnnModel {
    std::size_t k = 1;
    Tensor train_x;
    std::vector<double> train_y;
    bool fitted = false;
};

inline KnnModel fit_knn(const Tensor& x, std::span<const double> y, std::size_t k) {
    if (x.rows() != y.size() || x.rows() == 0) throw DataError("fit_knn: row/target mismatch");
    if (k < 1 || k > x.rows()) throw ConfigError("fit_knn: k must be in [1, n_train]");
    KnnModel m;
    m.k = k;
    m.train_x = x;
    m.train_y.assign(y.begin(), y.end());
    m.fitted = true;
    return m;
}

inline double predict_knn(const KnnModel& m, std::span<const double> query) {
    if (!m.fitted) throw TrainingError("knn model is not fitted");
    if (query.size() != m.train_x.cols()) throw DimensionError("knn predict: feature count mismatch");
    const std::size_t n = m.train_x.rows();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = m.train_x.row_data(i);
        double s = 0.0;
        for (std::size_t j = 0; j < query.size(); ++j) {
            const double dv = row[j] - query[j];
            s += dv * dv;
        }
        dist[i] = {s, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(m.k), dist.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < m.k; ++i) acc += m.train_y[dist[i].second];
    return acc / static_cast<double>(m.k);
}

inline std::vector<double> predict_knn(const KnnModel& m, const Tensor& x) {
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        out[i] = predict_knn(m, std::span<const double>(x.row_data(i), x.cols()));
    return out;
}

// The regressor component alone: same trunk as the VAE model, single output,
// no uncertainty head. Trained on mean squared error.
struct NnRegressorConfig {
    std::vector<std::size_t> trunk_dims = {128, 32};
    std::size_t epochs = 300;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double lambda_l2 = 0.0;
    std::uint64_t seed = 0;
};

struct NnRegressor {
    std::vector<DenseLayer> trunk;
    DenseLayer head;  // trunk_out -> 1, zero-initialized
    bool fitted = false;

    std::vector<ParamRef> parameters() {
        std::vector<ParamRef> ps;
        for (std::size_t i = 0; i < trunk.size(); ++i) {
            ps.push_back({"trunk." + std::to_string(i) + ".weights", &trunk[i].weights});
            ps.push_back({"trunk." + std::to_string(i) + ".bias", &trunk[i].bias});
        }
        ps.push_back({"head.weights", &head.weights});
        ps.push_back({"head.bias", &head.bias});
        return ps;
    }

    std::vector<double> predict(const Tensor& x) const {
        if (!fitted) throw TrainingError("nn regressor is not fitted");
        Tensor h = x;
        for (const DenseLayer& l : trunk) h = dense_forward(l, h);
        h = dense_forward(head, h);
        std::vector<double> out(h.rows());
        for (std::size_t i = 0; i < h.rows(); ++i) out[i] = h(i, 0);
        return out;
    }
};

inline NnRegressor fit_nn_regressor(const Tensor& x, std::span<const double> y, const NnRegressorConfig& cfg) {
    const std::size_t n = x.rows();
    if (n == 0 || n != y.size()) throw DataError("fit_nn_regressor: row/target mismatch");
    if (cfg.batch_size < 1 || cfg.batch_size > n)
        throw TrainingError("fit_nn_regressor: batch_size must be in [1, n]");

    NnRegressor m;
    Rng rng(mix_seed(cfg.seed, seed_tag::init));
    std::size_t prev = x.cols();
    for (std::size_t dim : cfg.trunk_dims) {
        m.trunk.emplace_back(prev, dim, Activation::tanh);
        m.trunk.back().init_uniform(rng);
        prev = dim;
    }
    m.head = DenseLayer(prev, 1, Activation::identity);
    m.head.init_zero();
    m.fitted = true;
    if (cfg.epochs == 0) return m;

    std::vector<ParamRef> params = m.parameters();
    AdamState adam = AdamState::for_params(params, cfg.learning_rate);
    std::vector<Tensor> grads(params.size());

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<std::size_t> order = shuffle_indices(n, epoch, cfg.seed);
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t b = std::min(cfg.batch_size, n - start);
            Tensor xb = Tensor::matrix(b, x.cols());
            std::vector<double> yb(b);
            for (std::size_t r = 0; r < b; ++r) {
                const std::size_t src = order[start + r];
                for (std::size_t j = 0; j < x.cols(); ++j) xb(r, j) = x(src, j);
                yb[r] = y[src];
            }

            std::vector<DenseCache> caches(m.trunk.size());
            DenseCache head_cache;
            const Tensor* h = &xb;
            for (std::size_t i = 0; i < m.trunk.size(); ++i)
                h = &dense_forward_cached(m.trunk[i], *h, caches[i]);
            dense_forward_cached(m.head, *h, head_cache);

            // d/d y_hat of mean squared error (+ L2 handled below).
            Tensor up = Tensor::matrix(b, 1);
            for (std::size_t r = 0; r < b; ++r)
                up(r, 0) = 2.0 * (head_cache.output(r, 0) - yb[r]) / static_cast<double>(b);

            DenseGrads hg = dense_backward(m.head, head_cache, up);
            grads[2 * m.trunk.size()] = std::move(hg.weights);
            grads[2 * m.trunk.size() + 1] = std::move(hg.bias);
            Tensor upstream = std::move(hg.input);
            for (std::size_t i = m.trunk.size(); i-- > 0;) {
                DenseGrads g = dense_backward(m.trunk[i], caches[i], upstream);
                grads[2 * i] = std::move(g.weights);
                grads[2 * i + 1] = std::move(g.bias);
                upstream = std::move(g.input);
            }
            if (cfg.lambda_l2 != 0.0) {
                for (std::size_t i = 0; i < m.trunk.size(); ++i)
                    for (std::size_t j = 0; j < m.trunk[i].weights.size(); ++j)
                        grads[2 * i][j] += 2.0 * cfg.lambda_l2 * m.trunk[i].weights[j];
                for (std::size_t j = 0; j < m.head.weights.size(); ++j)
                    grads[2 * m.trunk.size()][j] += 2.0 * cfg.lambda_l2 * m.head.weights[j];
            }
            adam_step(params, grads, adam);
        }
    }
    return m;
}

}  // namespace vaereg
