#pragma once

#include <cmath>
#include <span>
#include <string>

#include "vaereg/errors.hpp"
#include "vaereg/latent_generator.hpp"
#include "vaereg/tensor.hpp"

namespace vaereg {

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

// Diagonal Gaussian as (mean, log-variance) rows. Log-variance keeps the
// implied standard deviation positive without constraining the head outputs.
struct GaussianParams {
    Tensor mean;
    Tensor log_var;
};

enum class KlMode { analytic, mc };

inline KlMode kl_mode_from_string(const std::string& s) {
    if (s == "analytic") return KlMode::analytic;
    if (s == "mc") return KlMode::mc;
    throw ConfigError("invalid kl mode '" + s + "' (expected 'analytic' or 'mc')");
}

inline std::string kl_mode_name(KlMode m) { return m == KlMode::analytic ? "analytic" : "mc"; }

// log N(x; mean, exp(log_var)) for a scalar observation.
inline double gaussian_log_density(double x, double mean, double log_var) {
    const double d = x - mean;
    return -0.5 * kLogTwoPi - 0.5 * log_var - d * d / (2.0 * std::exp(log_var));
}

// Supervised first term of the bound: log q(c|x) at the observed target.
inline double label_loglik(double mean_c, double log_var_c, double c_true) {
    return gaussian_log_density(c_true, mean_c, log_var_c);
}

// Second term with the unit-covariance decoder likelihood:
// log N(x; x_hat, I) = -1/2 ||x - x_hat||^2 - D/2 log(2 pi), batch mean.
inline double recon_loglik(const Tensor& x, const Tensor& x_hat) {
    if (!x.same_shape(x_hat) || x.rank() != 2)
        throw DimensionError("recon_loglik: x " + shape_string(x) + " vs x_hat " + shape_string(x_hat));
    const std::size_t batch = x.rows(), d = x.cols();
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = x[i] - x_hat[i];
        sq += r * r;
    }
    return -0.5 * sq / static_cast<double>(batch) - 0.5 * static_cast<double>(d) * kLogTwoPi;
}

// Closed-form KL( N(mean, diag exp(log_var)) || N(u*c, sigma^2 I) ), summed
// over latent dimensions.
inline double kl_z_given_c(std::span<const double> mean, std::span<const double> log_var,
                           const LatentGenerator& gen, double c) {
    if (mean.size() != log_var.size() || mean.size() != gen.latent_dim())
        throw DimensionError("kl_z_given_c: dimension mismatch");
    const double sigma = gen.sigma();
    const double log_sigma = gen.log_sigma[0];
    const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
    double kl = 0.0;
    for (std::size_t m = 0; m < mean.size(); ++m) {
        const double diff = mean[m] - gen.u[m] * c;
        kl += log_sigma - 0.5 * log_var[m] + (std::exp(log_var[m]) + diff * diff) * inv_two_var - 0.5;
    }
    return kl;
}

inline double kl_z_given_c(const GaussianParams& q_z, const LatentGenerator& gen, double c) {
    return kl_z_given_c(std::span<const double>(q_z.mean.values()),
                        std::span<const double>(q_z.log_var.values()), gen, c);
}

// E_{q(c|x)}[ KL(q(z|x) || p(z|c)) ] for one sample.
//
// analytic: the KL is quadratic in c, so the expectation is exact:
//   KL(mean_c) + sum_m u_m^2 var_c / (2 sigma^2).
// mc: average of the closed-form KL over reparametrized draws
//   c_s = mean_c + exp(log_var_c / 2) * eps_s.
inline double expected_kl(std::span<const double> mean_z, std::span<const double> log_var_z,
                          double mean_c, double log_var_c, const LatentGenerator& gen, KlMode mode,
                          std::span<const double> eps_c = {}) {
    if (mode == KlMode::analytic) {
        const double sigma = gen.sigma();
        const double var_c = std::exp(log_var_c);
        return kl_z_given_c(mean_z, log_var_z, gen, mean_c) +
               gen.u.squared_norm() * var_c / (2.0 * sigma * sigma);
    }
    if (eps_c.empty()) throw TrainingError("expected_kl: mc mode needs at least one eps draw");
    const double std_c = std::exp(0.5 * log_var_c);
    double acc = 0.0;
    for (double e : eps_c) acc += kl_z_given_c(mean_z, log_var_z, gen, mean_c + std_c * e);
    return acc / static_cast<double>(eps_c.size());
}

inline double expected_kl(const GaussianParams& q_z, const GaussianParams& q_c, const LatentGenerator& gen,
                          KlMode mode, std::span<const double> eps_c = {}) {
    return expected_kl(std::span<const double>(q_z.mean.values()),
                       std::span<const double>(q_z.log_var.values()), q_c.mean[0], q_c.log_var[0], gen,
                       mode, eps_c);
}

// Reparametrization: mean + exp(log_var / 2) * eps, differentiable in both
// Gaussian parameters.
inline Tensor sample_reparam(const GaussianParams& params, const Tensor& eps) {
    if (!eps.same_shape(params.mean) || !params.mean.same_shape(params.log_var))
        throw DimensionError("sample_reparam: eps/mean/log_var shapes disagree");
    Tensor z = params.mean;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += std::exp(0.5 * params.log_var[i]) * eps[i];
    return z;
}

}  // namespace vaereg
