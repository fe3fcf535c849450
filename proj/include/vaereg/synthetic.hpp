#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vaereg/dataset.hpp"
#include "vaereg/dense.hpp"
#include "vaereg/errors.hpp"
#include "vaereg/rng.hpp"
#include "vaereg/tensor.hpp"
#include "vaereg/util.hpp"

namespace vaereg {

// Sampler mirroring the model's own generative process:
//   c ~ Uniform[lo, hi],  z ~ N(u_true * c_std, sigma_z^2 I),  x = g(z) + noise.
struct SyntheticSpec {
    std::size_t n = 500;
    std::size_t dims = 30;        // D
    std::size_t latent_dim = 8;   // M
    double c_lo = 18.0;
    double c_hi = 86.0;
    std::vector<double> u_true;   // unit direction; derived from decoder_seed when empty
    double sigma_z = 0.1;
    std::uint64_t decoder_seed = 7;
    double noise_x = 0.05;

    void validate() const {
        if (n < 2) throw DataError("synthetic spec: n must be >= 2");
        if (dims < latent_dim || latent_dim < 1) throw DataError("synthetic spec: need D >= M >= 1");
        if (!(c_lo < c_hi)) throw DataError("synthetic spec: c_lo must be < c_hi");
        if (sigma_z < 0.0 || noise_x < 0.0) throw DataError("synthetic spec: noise scales must be >= 0");
        if (!u_true.empty()) {
            if (u_true.size() != latent_dim)
                throw DataError("synthetic spec: u_true length must equal latent_dim");
            double norm = 0.0;
            for (double v : u_true) norm += v * v;
            if (std::abs(norm - 1.0) > 1e-9)
                throw DataError("synthetic spec: u_true must have unit norm");
        }
    }
};

// Fixed nonlinear ground-truth decoder: two tanh layers of widths (32, D),
// fully determined by decoder_seed. The widened first layer makes the
// target-to-feature map distinctly curved.
struct SyntheticDecoder {
    DenseLayer hidden;
    DenseLayer output;

    Tensor apply(const Tensor& z) const { return dense_forward(output, dense_forward(hidden, z)); }

    std::vector<double> apply_row(std::span<const double> z) const {
        Tensor zin = Tensor::matrix(1, z.size());
        for (std::size_t i = 0; i < z.size(); ++i) zin(0, i) = z[i];
        Tensor out = apply(zin);
        return std::vector<double>(out.values().begin(), out.values().end());
    }
};

inline SyntheticDecoder make_synthetic_decoder(const SyntheticSpec& spec) {
    Rng rng(mix_seed(spec.decoder_seed, seed_tag::synthetic));
    SyntheticDecoder g;
    g.hidden = DenseLayer(spec.latent_dim, 32, Activation::tanh);
    g.hidden.init_uniform(rng, 2.0);
    for (double& b : g.hidden.bias.values()) b = rng.uniform(-0.5, 0.5);
    g.output = DenseLayer(32, spec.dims, Activation::tanh);
    g.output.init_uniform(rng, 2.0);
    for (double& b : g.output.bias.values()) b = rng.uniform(-0.3, 0.3);
    return g;
}

inline std::vector<double> synthetic_direction(const SyntheticSpec& spec) {
    if (!spec.u_true.empty()) return spec.u_true;
    Rng rng(mix_seed(spec.decoder_seed, seed_tag::direction));
    std::vector<double> u(spec.latent_dim);
    double norm = 0.0;
    do {
        norm = 0.0;
        for (double& v : u) {
            v = rng.normal();
            norm += v * v;
        }
    } while (!(norm > 0.0));
    norm = std::sqrt(norm);
    for (double& v : u) v /= norm;
    return u;
}

// Ground truth retained for diagnostics and test oracles; never an input to
// training.
struct SyntheticTruth {
    Tensor z;                    // n x M latent samples
    std::vector<double> u_true;  // unit direction in latent space
    std::vector<double> c_std;   // standardized targets used by the generator
    double c_mean = 0.0;
    double c_sd = 1.0;
};

struct SyntheticData {
    Dataset dataset;
    SyntheticTruth truth;
};

inline SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::vector<double> u = synthetic_direction(spec);
    const SyntheticDecoder g = make_synthetic_decoder(spec);

    Rng rng(mix_seed(seed, seed_tag::synthetic));
    std::vector<double> c(spec.n);
    for (double& v : c) v = rng.uniform(spec.c_lo, spec.c_hi);

    const double c_mean = mean_of(c);
    const double c_sd = population_std(c);
    if (!(c_sd > 0.0)) throw DataError("synthetic targets degenerate (zero spread)");
    std::vector<double> c_std(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) c_std[i] = (c[i] - c_mean) / c_sd;

    Tensor z = Tensor::matrix(spec.n, spec.latent_dim);
    for (std::size_t i = 0; i < spec.n; ++i) {
        double* zrow = z.row_data(i);
        for (std::size_t m = 0; m < spec.latent_dim; ++m)
            zrow[m] = u[m] * c_std[i] + spec.sigma_z * rng.normal();
    }

    Tensor x = g.apply(z);
    if (spec.noise_x > 0.0)
        for (double& v : x.values()) v += spec.noise_x * rng.normal();

    SyntheticData out;
    out.dataset.X = std::move(x);
    out.dataset.c = std::move(c);
    out.dataset.provenance = Provenance::synthetic;
    out.dataset.feature_names.reserve(spec.dims);
    for (std::size_t j = 0; j < spec.dims; ++j) out.dataset.feature_names.push_back("f" + std::to_string(j));
    out.dataset.validate();
    out.truth.z = std::move(z);
    out.truth.u_true = u;
    out.truth.c_std = std::move(c_std);
    out.truth.c_mean = c_mean;
    out.truth.c_sd = c_sd;
    return out;
}

}  // namespace vaereg
