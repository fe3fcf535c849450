#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "vaereg/errors.hpp"
#include "vaereg/rng.hpp"
#include "vaereg/tensor.hpp"

namespace vaereg {

enum class Activation { identity, tanh, relu };

inline std::string activation_name(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
    }
    return "?";
}

// Fully connected layer: y = act(x W^T + b), weights stored out_dim x in_dim.
struct DenseLayer {
    Tensor weights;
    Tensor bias;
    Activation activation = Activation::identity;

    DenseLayer() = default;
    DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation act)
        : weights(Tensor::matrix(out_dim, in_dim)), bias(Tensor::vector(out_dim)), activation(act) {
        if (in_dim < 1 || out_dim < 1) throw DimensionError("dense layer dims must be >= 1");
    }

    std::size_t in_dim() const { return weights.cols(); }
    std::size_t out_dim() const { return weights.rows(); }

    // Uniform [-s, s] with s = sqrt(6 / (in + out)); keeps tanh pre-activations
    // in the near-linear range at unit-variance inputs.
    void init_uniform(Rng& rng, double gain = 1.0) {
        const double s = gain * std::sqrt(6.0 / static_cast<double>(in_dim() + out_dim()));
        for (double& w : weights.values()) w = rng.uniform(-s, s);
        bias.fill(0.0);
    }

    void init_zero() {
        weights.fill(0.0);
        bias.fill(0.0);
    }
};

// Forward-pass state consumed by dense_backward.
struct DenseCache {
    Tensor input;   // batch x in
    Tensor output;  // batch x out, post-activation
};

struct DenseGrads {
    Tensor weights;
    Tensor bias;
    Tensor input;
};

namespace detail {

inline double activate(Activation a, double x) {
    switch (a) {
        case Activation::identity: return x;
        case Activation::tanh: return std::tanh(x);
        case Activation::relu: return x > 0.0 ? x : 0.0;
    }
    return x;
}

// Derivative expressed through the post-activation value; exact for all
// three activations (tanh' = 1 - y^2, relu' = [y > 0], identity' = 1).
inline double activate_derivative(Activation a, double y) {
    switch (a) {
        case Activation::identity: return 1.0;
        case Activation::tanh: return 1.0 - y * y;
        case Activation::relu: return y > 0.0 ? 1.0 : 0.0;
    }
    return 1.0;
}

}  // namespace detail

inline Tensor dense_forward(const DenseLayer& layer, const Tensor& input) {
    if (input.rank() != 2 || input.cols() != layer.in_dim())
        throw DimensionError("dense_forward: input shape " + shape_string(input) + " does not match in_dim " +
                             std::to_string(layer.in_dim()));
    const std::size_t batch = input.rows(), in = layer.in_dim(), out = layer.out_dim();
    Tensor y = Tensor::matrix(batch, out);
    for (std::size_t b = 0; b < batch; ++b) {
        const double* x = input.row_data(b);
        double* yb = y.row_data(b);
        for (std::size_t o = 0; o < out; ++o) {
            const double* w = layer.weights.row_data(o);
            double acc = layer.bias[o];
            for (std::size_t i = 0; i < in; ++i) acc += w[i] * x[i];
            yb[o] = detail::activate(layer.activation, acc);
        }
    }
    return y;
}

inline const Tensor& dense_forward_cached(const DenseLayer& layer, const Tensor& input, DenseCache& cache) {
    cache.input = input;
    cache.output = dense_forward(layer, input);
    return cache.output;
}

// Exact analytic partials of the loss w.r.t. weights, bias and input given
// the upstream gradient dL/dy.
inline DenseGrads dense_backward(const DenseLayer& layer, const DenseCache& cache, const Tensor& upstream) {
    if (!upstream.same_shape(cache.output))
        throw DimensionError("dense_backward: upstream shape " + shape_string(upstream) +
                             " does not match forward output " + shape_string(cache.output));
    const std::size_t batch = cache.input.rows(), in = layer.in_dim(), out = layer.out_dim();
    DenseGrads g;
    g.weights = Tensor::matrix(out, in);
    g.bias = Tensor::vector(out);
    g.input = Tensor::matrix(batch, in);
    for (std::size_t b = 0; b < batch; ++b) {
        const double* x = cache.input.row_data(b);
        const double* y = cache.output.row_data(b);
        const double* up = upstream.row_data(b);
        double* gx = g.input.row_data(b);
        for (std::size_t o = 0; o < out; ++o) {
            const double d = up[o] * detail::activate_derivative(layer.activation, y[o]);
            if (d == 0.0) continue;
            g.bias[o] += d;
            double* gw = g.weights.row_data(o);
            const double* w = layer.weights.row_data(o);
            for (std::size_t i = 0; i < in; ++i) {
                gw[i] += d * x[i];
                gx[i] += d * w[i];
            }
        }
    }
    return g;
}

}  // namespace vaereg
