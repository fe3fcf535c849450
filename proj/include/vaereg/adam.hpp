#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vaereg/errors.hpp"
#include "vaereg/tensor.hpp"

namespace vaereg {

// Named handle to a trainable tensor; models expose their parameters as a
// stable-ordered list of these.
struct ParamRef {
    std::string name;
    Tensor* value = nullptr;
};

// Per-parameter gradients (aligned with a model's parameters()) plus the
// scalar loss they came from. Zeroed between minibatches.
struct GradientTape {
    std::vector<Tensor> grads;
    double loss = 0.0;

    void zero() {
        for (Tensor& g : grads) g.fill(0.0);
        loss = 0.0;
    }
};

struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step_count = 0;
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;

    static AdamState for_params(const std::vector<ParamRef>& params, double lr = 1e-3) {
        AdamState s;
        s.learning_rate = lr;
        s.first_moment.reserve(params.size());
        s.second_moment.reserve(params.size());
        for (const ParamRef& p : params) {
            s.first_moment.emplace_back(Tensor(p.value->shape()));
            s.second_moment.emplace_back(Tensor(p.value->shape()));
        }
        return s;
    }
};

// Standard Adam update with bias correction.
inline void adam_step(const std::vector<ParamRef>& params, const std::vector<Tensor>& grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size())
        throw DimensionError("adam_step: parameter/gradient/state counts disagree");
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& theta = *params[p].value;
        const Tensor& g = grads[p];
        if (!g.same_shape(theta))
            throw DimensionError("adam_step: gradient shape mismatch for " + params[p].name);
        Tensor& m = state.first_moment[p];
        Tensor& v = state.second_moment[p];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double gi = g[i];
            if (!std::isfinite(gi))
                throw TrainingError("non-finite gradient in parameter " + params[p].name);
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gi;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            theta[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

}  // namespace vaereg
