#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "vaereg/dataset.hpp"
#include "vaereg/errors.hpp"
#include "vaereg/tensor.hpp"
#include "vaereg/util.hpp"
#include "vaereg/vae_regressor.hpp"

namespace vaereg {

namespace detail {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Small and
// deterministic; latent dimensions here are tiny. Eigenvalues returned in
// descending order with matching unit eigenvectors as rows of `vectors`.
inline void symmetric_eigen(std::vector<double> a, std::size_t n, std::vector<double>& values,
                            std::vector<double>& vectors) {
    vectors.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) vectors[i * n + i] = 1.0;
    for (int sweep = 0; sweep < 128; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double cth = 1.0 / std::sqrt(t * t + 1.0);
                const double sth = t * cth;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = cth * akp - sth * akq;
                    a[k * n + q] = sth * akp + cth * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = cth * apk - sth * aqk;
                    a[q * n + k] = sth * apk + cth * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = vectors[p * n + k], vkq = vectors[q * n + k];
                    vectors[p * n + k] = cth * vkp - sth * vkq;
                    vectors[q * n + k] = sth * vkp + cth * vkq;
                }
            }
        }
    }
    values.resize(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = a[i * n + i];
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&values](std::size_t l, std::size_t r) { return values[l] > values[r]; });
    std::vector<double> sv(n), svec(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        sv[i] = values[order[i]];
        for (std::size_t k = 0; k < n; ++k) svec[i * n + k] = vectors[order[i] * n + k];
    }
    values = std::move(sv);
    vectors = std::move(svec);
}

}  // namespace detail

// Decoded feature rows along the generator direction for a grid of raw
// target values, mapped back to raw feature units.
struct TraversalResult {
    std::vector<double> grid;  // raw target values, strictly increasing
    Tensor decoded;            // grid size x D, de-standardized
};

inline TraversalResult traverse(const VaeRegressor& model, const Standardization& stats,
                                std::span<const double> c_grid) {
    if (!model.trained) throw TrainingError("traverse: model is not trained");
    if (c_grid.empty()) throw DataError("traverse: empty grid");
    for (std::size_t i = 1; i < c_grid.size(); ++i)
        if (!(c_grid[i] > c_grid[i - 1])) throw DataError("traverse: grid must be strictly increasing");

    Tensor z = Tensor::matrix(c_grid.size(), model.latent_dim);
    for (std::size_t i = 0; i < c_grid.size(); ++i) {
        const double c_std = stats.standardize_target(c_grid[i]);
        const Tensor m = model.generator.mean_for(c_std);
        for (std::size_t j = 0; j < model.latent_dim; ++j) z(i, j) = m[j];
    }
    Tensor decoded = model.decode(z);
    TraversalResult out;
    out.grid.assign(c_grid.begin(), c_grid.end());
    out.decoded = Tensor::matrix(decoded.rows(), decoded.cols());
    for (std::size_t i = 0; i < decoded.rows(); ++i) {
        const std::vector<double> raw =
            stats.destandardize_features(std::span<const double>(decoded.row_data(i), decoded.cols()));
        for (std::size_t j = 0; j < decoded.cols(); ++j) out.decoded(i, j) = raw[j];
    }
    return out;
}

// Top-two principal components of mean-centered latent representations.
struct ProjectionResult {
    Tensor coords;                                   // n x 2
    std::vector<double> targets;                     // per-point ground truth, for coloring
    std::array<double, 2> explained_variance_ratio;  // of total variance, non-increasing
    std::array<std::vector<double>, 2> components;   // orthonormal loading vectors
};

inline ProjectionResult project_2d(const Tensor& latent_means, std::span<const double> targets) {
    if (latent_means.rank() != 2 || latent_means.rows() < 3 || latent_means.cols() < 2)
        throw DataError("project_2d: need n >= 3 points of dimension >= 2");
    if (targets.size() != latent_means.rows()) throw DimensionError("project_2d: target count mismatch");
    const std::size_t n = latent_means.rows(), m = latent_means.cols();

    std::vector<double> mean(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = latent_means.row_data(i);
        for (std::size_t j = 0; j < m; ++j) mean[j] += row[j];
    }
    for (double& v : mean) v /= static_cast<double>(n);

    std::vector<double> cov(m * m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = latent_means.row_data(i);
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k <= j; ++k)
                cov[j * m + k] += (row[j] - mean[j]) * (row[k] - mean[k]);
    }
    double trace = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k <= j; ++k) {
            cov[j * m + k] /= static_cast<double>(n);
            cov[k * m + j] = cov[j * m + k];
        }
        trace += cov[j * m + j];
    }
    if (!(trace > 0.0)) throw DataError("project_2d: zero-variance input (rank 0)");

    std::vector<double> values, vectors;
    detail::symmetric_eigen(cov, m, values, vectors);

    ProjectionResult out;
    out.targets.assign(targets.begin(), targets.end());
    out.coords = Tensor::matrix(n, 2);
    for (std::size_t comp = 0; comp < 2; ++comp) {
        std::vector<double> v(vectors.begin() + static_cast<std::ptrdiff_t>(comp * m),
                              vectors.begin() + static_cast<std::ptrdiff_t>((comp + 1) * m));
        // Deterministic sign: the largest-magnitude loading is positive.
        std::size_t arg = 0;
        for (std::size_t j = 1; j < m; ++j)
            if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
        if (v[arg] < 0.0)
            for (double& x : v) x = -x;
        out.explained_variance_ratio[comp] = std::max(0.0, values[comp]) / trace;
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = latent_means.row_data(i);
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += (row[j] - mean[j]) * v[j];
            out.coords(i, comp) = s;
        }
        out.components[comp] = std::move(v);
    }
    return out;
}

// Pearson correlation between the latent coordinate along u and the targets.
inline double disentanglement_score(const Tensor& latent_means, const Tensor& u,
                                    std::span<const double> targets) {
    if (latent_means.rank() != 2 || latent_means.cols() != u.size())
        throw DimensionError("disentanglement_score: latent dimension mismatch");
    if (targets.size() != latent_means.rows())
        throw DimensionError("disentanglement_score: target count mismatch");
    std::vector<double> proj(latent_means.rows());
    for (std::size_t i = 0; i < latent_means.rows(); ++i) {
        const double* row = latent_means.row_data(i);
        double s = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) s += row[j] * u[j];
        proj[i] = s;
    }
    return pearson_correlation(proj, targets);
}

}  // namespace vaereg
