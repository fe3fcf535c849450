#pragma once

#include <cmath>
#include <cstddef>

#include "vaereg/errors.hpp"
#include "vaereg/rng.hpp"
#include "vaereg/tensor.hpp"

namespace vaereg {

// Target-conditioned latent prior p(z|c) = N(u*c, sigma^2 I) with u kept on
// the unit sphere. Traversing c along u yields target-specific latents.
struct LatentGenerator {
    Tensor u;              // unit-norm direction, length M
    Tensor log_sigma;      // scalar, trainable only when learn_sigma
    bool learn_sigma = false;

    LatentGenerator() : log_sigma(Tensor::vector(1, 0.0)) {}

    explicit LatentGenerator(std::size_t latent_dim, double sigma = 1.0, bool learn = false)
        : u(Tensor::vector(latent_dim)), log_sigma(Tensor::vector(1)), learn_sigma(learn) {
        set_sigma(sigma);
        if (latent_dim > 0) u[0] = 1.0;
    }

    std::size_t latent_dim() const { return u.size(); }

    double sigma() const { return std::exp(log_sigma[0]); }

    void set_sigma(double s) {
        if (!(s > 0.0)) throw ConstraintError("generator sigma must be positive");
        log_sigma[0] = std::log(s);
    }

    double u_norm() const { return std::sqrt(u.squared_norm()); }

    // Projected-gradient maintenance of u^T u = 1: ordinary gradient steps are
    // followed by this renormalization.
    void renormalize() {
        const double n = u_norm();
        if (!(n > 0.0)) throw ConstraintError("cannot renormalize zero-norm direction u");
        for (double& v : u.values()) v /= n;
    }

    void init_random_direction(Rng& rng) {
        for (double& v : u.values()) v = rng.normal();
        renormalize();
    }

    // Mean of p(z|c): the direction scaled by the (standardized) target.
    Tensor mean_for(double c) const {
        Tensor m = Tensor::vector(latent_dim());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = u[i] * c;
        return m;
    }
};

}  // namespace vaereg
