#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "vaereg/adam.hpp"
#include "vaereg/dense.hpp"
#include "vaereg/errors.hpp"
#include "vaereg/gaussian.hpp"
#include "vaereg/latent_generator.hpp"
#include "vaereg/rng.hpp"
#include "vaereg/tensor.hpp"

namespace vaereg {

struct VaeConfig {
    std::size_t input_dim = 0;
    std::vector<std::size_t> trunk_dims = {128, 32};
    std::size_t latent_dim = 8;
    double sigma = 1.0;
    bool learn_sigma = false;
};

// Per-term weights for ablations; the objective uses (1, 1, 1).
struct TermWeights {
    double label = 1.0;
    double recon = 1.0;
    double kl = 1.0;
};

struct ElboTerms {
    double label_loglik = 0.0;
    double recon_loglik = 0.0;
    double expected_kl = 0.0;
    double l2_penalty = 0.0;
    double total_loss = 0.0;
};

// Encoder q(z|x) and regressor q(c|x) sharing a dense trunk, decoder p(x|z),
// and the latent generator p(z|c). Gradients of the full objective are
// derived by hand in loss_and_grad.
struct VaeRegressor {
    std::vector<DenseLayer> trunk;   // shared feature layers, tanh
    DenseLayer encoder_mean;         // trunk_out -> M
    DenseLayer encoder_log_var;      // trunk_out -> M
    DenseLayer regressor_head;       // trunk_out -> 2 (mean, log-variance of c)
    std::vector<DenseLayer> decoder; // M -> reversed trunk dims -> D
    LatentGenerator generator;
    std::size_t input_dim = 0;
    std::size_t latent_dim = 0;
    bool trained = false;

    // Hidden layers get scaled-uniform weights; output heads (and the final
    // decoder layer) start at zero, so the initial posteriors are standard
    // normal and the initial prediction is the standardized-target mean.
    static VaeRegressor build(const VaeConfig& cfg, Rng& rng) {
        if (cfg.input_dim < 1 || cfg.latent_dim < 1 || cfg.trunk_dims.empty())
            throw DimensionError("VaeConfig: input_dim, latent_dim and trunk_dims must be set");
        VaeRegressor m;
        m.input_dim = cfg.input_dim;
        m.latent_dim = cfg.latent_dim;
        std::size_t prev = cfg.input_dim;
        for (std::size_t d : cfg.trunk_dims) {
            m.trunk.emplace_back(prev, d, Activation::tanh);
            m.trunk.back().init_uniform(rng);
            prev = d;
        }
        m.encoder_mean = DenseLayer(prev, cfg.latent_dim, Activation::identity);
        m.encoder_log_var = DenseLayer(prev, cfg.latent_dim, Activation::identity);
        m.regressor_head = DenseLayer(prev, 2, Activation::identity);
        m.encoder_mean.init_zero();
        m.encoder_log_var.init_zero();
        m.regressor_head.init_zero();
        std::size_t dprev = cfg.latent_dim;
        for (std::size_t i = cfg.trunk_dims.size(); i-- > 0;) {
            m.decoder.emplace_back(dprev, cfg.trunk_dims[i], Activation::tanh);
            m.decoder.back().init_uniform(rng);
            dprev = cfg.trunk_dims[i];
        }
        m.decoder.emplace_back(dprev, cfg.input_dim, Activation::identity);
        m.decoder.back().init_zero();
        m.generator = LatentGenerator(cfg.latent_dim, cfg.sigma, cfg.learn_sigma);
        m.generator.init_random_direction(rng);
        return m;
    }

    std::vector<ParamRef> parameters() {
        std::vector<ParamRef> ps;
        auto add = [&ps](std::string name, Tensor& t) { ps.push_back({std::move(name), &t}); };
        for (std::size_t i = 0; i < trunk.size(); ++i) {
            add("trunk." + std::to_string(i) + ".weights", trunk[i].weights);
            add("trunk." + std::to_string(i) + ".bias", trunk[i].bias);
        }
        add("encoder_mean.weights", encoder_mean.weights);
        add("encoder_mean.bias", encoder_mean.bias);
        add("encoder_log_var.weights", encoder_log_var.weights);
        add("encoder_log_var.bias", encoder_log_var.bias);
        add("regressor.weights", regressor_head.weights);
        add("regressor.bias", regressor_head.bias);
        for (std::size_t j = 0; j < decoder.size(); ++j) {
            add("decoder." + std::to_string(j) + ".weights", decoder[j].weights);
            add("decoder." + std::to_string(j) + ".bias", decoder[j].bias);
        }
        add("generator.u", generator.u);
        if (generator.learn_sigma) add("generator.log_sigma", generator.log_sigma);
        return ps;
    }

    std::vector<Tensor> zero_grads() {
        std::vector<Tensor> gs;
        for (const ParamRef& p : parameters()) gs.emplace_back(Tensor(p.value->shape()));
        return gs;
    }

    Tensor trunk_forward(const Tensor& x) const {
        if (x.rank() != 2 || x.cols() != input_dim)
            throw DimensionError("VaeRegressor: input shape " + shape_string(x) + " does not match input_dim " +
                                 std::to_string(input_dim));
        Tensor h = x;
        for (const DenseLayer& layer : trunk) h = dense_forward(layer, h);
        return h;
    }

    // q(z|x): batch x M mean and log-variance.
    GaussianParams encode(const Tensor& x) const {
        Tensor h = trunk_forward(x);
        return {dense_forward(encoder_mean, h), dense_forward(encoder_log_var, h)};
    }

    // q(c|x): batch x 1 predicted mean and log-variance of the target.
    GaussianParams regress(const Tensor& x) const {
        Tensor h = trunk_forward(x);
        Tensor r = dense_forward(regressor_head, h);
        GaussianParams out{Tensor::matrix(r.rows(), 1), Tensor::matrix(r.rows(), 1)};
        for (std::size_t b = 0; b < r.rows(); ++b) {
            out.mean(b, 0) = r(b, 0);
            out.log_var(b, 0) = r(b, 1);
        }
        return out;
    }

    // p(x|z) mean: batch x D reconstruction.
    Tensor decode(const Tensor& z) const {
        if (z.rank() != 2 || z.cols() != latent_dim)
            throw DimensionError("decode: z shape " + shape_string(z) + " does not match latent_dim " +
                                 std::to_string(latent_dim));
        Tensor h = z;
        for (const DenseLayer& layer : decoder) h = dense_forward(layer, h);
        return h;
    }

    ElboTerms loss(const Tensor& x, const std::vector<double>& c, const Tensor& eps_z, const Tensor& eps_c,
                   double lambda_l2, KlMode mode, const TermWeights& weights = {}) const {
        Workspace ws;
        forward(x, eps_z, ws);
        return compute_terms(x, c, eps_c, lambda_l2, mode, weights, ws);
    }

    // Forward pass plus exact analytic gradients of total_loss for every
    // parameter, aligned with parameters(). Shared-trunk gradients accumulate
    // from the encoder, regressor and (through z) decoder paths.
    ElboTerms loss_and_grad(const Tensor& x, const std::vector<double>& c, const Tensor& eps_z,
                            const Tensor& eps_c, double lambda_l2, KlMode mode, GradientTape& tape,
                            const TermWeights& weights = {}) const {
        Workspace ws;
        forward(x, eps_z, ws);
        const ElboTerms terms = compute_terms(x, c, eps_c, lambda_l2, mode, weights, ws);
        backward(x, c, eps_z, eps_c, lambda_l2, mode, weights, ws, tape.grads);
        tape.loss = terms.total_loss;
        return terms;
    }

private:
    struct Workspace {
        std::vector<DenseCache> trunk_caches;
        DenseCache enc_mean_cache;
        DenseCache enc_log_var_cache;
        DenseCache reg_cache;
        Tensor z;
        std::vector<DenseCache> decoder_caches;
    };

    void forward(const Tensor& x, const Tensor& eps_z, Workspace& ws) const {
        const std::size_t batch = x.rows();
        if (x.rank() != 2 || x.cols() != input_dim)
            throw DimensionError("loss: input shape " + shape_string(x) + " does not match input_dim " +
                                 std::to_string(input_dim));
        if (eps_z.rank() != 2 || eps_z.rows() != batch || eps_z.cols() != latent_dim)
            throw DimensionError("loss: eps_z shape " + shape_string(eps_z) + " must be batch x latent_dim");
        ws.trunk_caches.resize(trunk.size());
        const Tensor* h = &x;
        for (std::size_t i = 0; i < trunk.size(); ++i)
            h = &dense_forward_cached(trunk[i], *h, ws.trunk_caches[i]);
        dense_forward_cached(encoder_mean, *h, ws.enc_mean_cache);
        dense_forward_cached(encoder_log_var, *h, ws.enc_log_var_cache);
        dense_forward_cached(regressor_head, *h, ws.reg_cache);

        const Tensor& mu_z = ws.enc_mean_cache.output;
        const Tensor& lv_z = ws.enc_log_var_cache.output;
        ws.z = Tensor::matrix(batch, latent_dim);
        for (std::size_t i = 0; i < ws.z.size(); ++i)
            ws.z[i] = mu_z[i] + std::exp(0.5 * lv_z[i]) * eps_z[i];

        ws.decoder_caches.resize(decoder.size());
        const Tensor* d = &ws.z;
        for (std::size_t j = 0; j < decoder.size(); ++j)
            d = &dense_forward_cached(decoder[j], *d, ws.decoder_caches[j]);
    }

    double weight_penalty() const {
        double s = 0.0;
        for (const DenseLayer& l : trunk) s += l.weights.squared_norm();
        s += encoder_mean.weights.squared_norm();
        s += encoder_log_var.weights.squared_norm();
        s += regressor_head.weights.squared_norm();
        for (const DenseLayer& l : decoder) s += l.weights.squared_norm();
        return s;
    }

    ElboTerms compute_terms(const Tensor& x, const std::vector<double>& c, const Tensor& eps_c,
                            double lambda_l2, KlMode mode, const TermWeights& weights,
                            const Workspace& ws) const {
        const std::size_t batch = x.rows();
        if (c.size() != batch) throw DimensionError("loss: target count does not match batch size");
        if (mode == KlMode::mc && (eps_c.rank() != 2 || eps_c.rows() != batch || eps_c.cols() < 1))
            throw DimensionError("loss: mc mode needs eps_c with shape batch x k (k >= 1)");

        const Tensor& mu_z = ws.enc_mean_cache.output;
        const Tensor& lv_z = ws.enc_log_var_cache.output;
        const Tensor& reg = ws.reg_cache.output;
        const Tensor& x_hat = ws.decoder_caches.back().output;

        double label_sum = 0.0, kl_sum = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            const double mu_c = reg(b, 0), lv_c = reg(b, 1);
            label_sum += label_loglik(mu_c, lv_c, c[b]);
            std::span<const double> mz(mu_z.row_data(b), latent_dim);
            std::span<const double> lz(lv_z.row_data(b), latent_dim);
            if (mode == KlMode::analytic) {
                kl_sum += expected_kl(mz, lz, mu_c, lv_c, generator, KlMode::analytic);
            } else {
                std::span<const double> eps(eps_c.row_data(b), eps_c.cols());
                kl_sum += expected_kl(mz, lz, mu_c, lv_c, generator, KlMode::mc, eps);
            }
        }

        ElboTerms t;
        t.label_loglik = label_sum / static_cast<double>(batch);
        t.recon_loglik = recon_loglik(x, x_hat);
        t.expected_kl = kl_sum / static_cast<double>(batch);
        t.l2_penalty = lambda_l2 * weight_penalty();
        t.total_loss = -(weights.label * t.label_loglik + weights.recon * t.recon_loglik -
                         weights.kl * t.expected_kl) +
                       t.l2_penalty;
        check_finite(t);
        return t;
    }

    static void check_finite(const ElboTerms& t) {
        const char* bad = nullptr;
        if (!std::isfinite(t.label_loglik)) bad = "label_loglik";
        else if (!std::isfinite(t.recon_loglik)) bad = "recon_loglik";
        else if (!std::isfinite(t.expected_kl)) bad = "expected_kl";
        else if (!std::isfinite(t.l2_penalty)) bad = "l2_penalty";
        if (!bad) return;
        std::ostringstream msg;
        msg << "non-finite loss term " << bad << " (label_loglik=" << t.label_loglik
            << ", recon_loglik=" << t.recon_loglik << ", expected_kl=" << t.expected_kl
            << ", l2=" << t.l2_penalty << ")";
        throw TrainingError(msg.str());
    }

    void backward(const Tensor& x, const std::vector<double>& c, const Tensor& eps_z, const Tensor& eps_c,
                  double lambda_l2, KlMode mode, const TermWeights& weights, const Workspace& ws,
                  std::vector<Tensor>& grads) const {
        const std::size_t batch = x.rows();
        const std::size_t t_layers = trunk.size();

        // Gradient slots, aligned with parameters().
        grads.clear();
        for (std::size_t i = 0; i < t_layers; ++i) {
            grads.emplace_back(Tensor(trunk[i].weights.shape()));
            grads.emplace_back(Tensor(trunk[i].bias.shape()));
        }
        const std::size_t heads_base = 2 * t_layers;
        grads.emplace_back(Tensor(encoder_mean.weights.shape()));
        grads.emplace_back(Tensor(encoder_mean.bias.shape()));
        grads.emplace_back(Tensor(encoder_log_var.weights.shape()));
        grads.emplace_back(Tensor(encoder_log_var.bias.shape()));
        grads.emplace_back(Tensor(regressor_head.weights.shape()));
        grads.emplace_back(Tensor(regressor_head.bias.shape()));
        const std::size_t decoder_base = heads_base + 6;
        for (std::size_t j = 0; j < decoder.size(); ++j) {
            grads.emplace_back(Tensor(decoder[j].weights.shape()));
            grads.emplace_back(Tensor(decoder[j].bias.shape()));
        }
        const std::size_t u_index = decoder_base + 2 * decoder.size();
        grads.emplace_back(Tensor(generator.u.shape()));
        if (generator.learn_sigma) grads.emplace_back(Tensor(generator.log_sigma.shape()));

        const Tensor& mu_z = ws.enc_mean_cache.output;
        const Tensor& lv_z = ws.enc_log_var_cache.output;
        const Tensor& reg = ws.reg_cache.output;
        const Tensor& x_hat = ws.decoder_caches.back().output;

        const double inv_b = 1.0 / static_cast<double>(batch);
        const double scale_label = weights.label * inv_b;  // enters total with minus sign
        const double scale_recon = weights.recon * inv_b;
        const double scale_kl = weights.kl * inv_b;

        // Reconstruction path: d total / d x_hat = w_r (x_hat - x) / B.
        Tensor upstream = Tensor::matrix(batch, input_dim);
        for (std::size_t i = 0; i < upstream.size(); ++i)
            upstream[i] = scale_recon * (x_hat[i] - x[i]);
        for (std::size_t j = decoder.size(); j-- > 0;) {
            DenseGrads g = dense_backward(decoder[j], ws.decoder_caches[j], upstream);
            grads[decoder_base + 2 * j] = std::move(g.weights);
            grads[decoder_base + 2 * j + 1] = std::move(g.bias);
            upstream = std::move(g.input);
        }
        // upstream is now d total / d z (batch x M).

        // Reparametrized sample: z = mu_z + exp(lv_z / 2) * eps.
        Tensor d_mu_z = upstream;
        Tensor d_lv_z = Tensor::matrix(batch, latent_dim);
        for (std::size_t i = 0; i < d_lv_z.size(); ++i)
            d_lv_z[i] = upstream[i] * eps_z[i] * 0.5 * std::exp(0.5 * lv_z[i]);

        const double sigma = generator.sigma();
        const double inv_var = 1.0 / (sigma * sigma);
        const double u_sq = generator.u.squared_norm();
        Tensor& d_u = grads[u_index];
        double d_log_sigma = 0.0;

        Tensor d_reg = Tensor::matrix(batch, 2);
        for (std::size_t b = 0; b < batch; ++b) {
            const double mu_c = reg(b, 0), lv_c = reg(b, 1);
            const double* mz = mu_z.row_data(b);
            const double* lz = lv_z.row_data(b);
            double* dmz = d_mu_z.row_data(b);
            double* dlz = d_lv_z.row_data(b);

            // Supervised label term: total includes -w_l * mean_b log q(c|x).
            {
                const double var_c = std::exp(lv_c);
                const double err = c[b] - mu_c;
                d_reg(b, 0) -= scale_label * (err / var_c);
                d_reg(b, 1) -= scale_label * (-0.5 + err * err / (2.0 * var_c));
            }

            // Expected KL term: total includes +w_k * mean_b E[KL].
            if (mode == KlMode::analytic) {
                const double var_c = std::exp(lv_c);
                double d_mu_c = 0.0;
                double sq_acc = 0.0;
                for (std::size_t m = 0; m < latent_dim; ++m) {
                    const double diff = mz[m] - generator.u[m] * mu_c;
                    dmz[m] += scale_kl * diff * inv_var;
                    dlz[m] += scale_kl * (-0.5 + std::exp(lz[m]) * 0.5 * inv_var);
                    d_mu_c -= generator.u[m] * diff * inv_var;
                    d_u[m] += scale_kl * (-mu_c * diff * inv_var + generator.u[m] * var_c * inv_var);
                    sq_acc += std::exp(lz[m]) + diff * diff;
                }
                d_reg(b, 0) += scale_kl * d_mu_c;
                d_reg(b, 1) += scale_kl * u_sq * var_c * 0.5 * inv_var;
                if (generator.learn_sigma)
                    d_log_sigma += scale_kl * (static_cast<double>(latent_dim) - sq_acc * inv_var -
                                               u_sq * var_c * inv_var);
            } else {
                const std::size_t k = eps_c.cols();
                const double wk = scale_kl / static_cast<double>(k);
                const double std_c = std::exp(0.5 * lv_c);
                for (std::size_t s = 0; s < k; ++s) {
                    const double eps = eps_c(b, s);
                    const double cs = mu_c + std_c * eps;
                    double d_cs = 0.0;
                    double sq_acc = 0.0;
                    for (std::size_t m = 0; m < latent_dim; ++m) {
                        const double diff = mz[m] - generator.u[m] * cs;
                        dmz[m] += wk * diff * inv_var;
                        dlz[m] += wk * (-0.5 + std::exp(lz[m]) * 0.5 * inv_var);
                        d_cs -= generator.u[m] * diff * inv_var;
                        d_u[m] += wk * (-cs * diff * inv_var);
                        sq_acc += std::exp(lz[m]) + diff * diff;
                    }
                    d_reg(b, 0) += wk * d_cs;
                    d_reg(b, 1) += wk * d_cs * eps * 0.5 * std_c;
                    if (generator.learn_sigma)
                        d_log_sigma += wk * (static_cast<double>(latent_dim) - sq_acc * inv_var);
                }
            }
        }
        if (generator.learn_sigma) grads[u_index + 1][0] = d_log_sigma;

        // Head backprops; their input gradients accumulate into the shared trunk.
        Tensor d_trunk_out;
        {
            DenseGrads g = dense_backward(encoder_mean, ws.enc_mean_cache, d_mu_z);
            grads[heads_base + 0] = std::move(g.weights);
            grads[heads_base + 1] = std::move(g.bias);
            d_trunk_out = std::move(g.input);
        }
        {
            DenseGrads g = dense_backward(encoder_log_var, ws.enc_log_var_cache, d_lv_z);
            grads[heads_base + 2] = std::move(g.weights);
            grads[heads_base + 3] = std::move(g.bias);
            for (std::size_t i = 0; i < d_trunk_out.size(); ++i) d_trunk_out[i] += g.input[i];
        }
        {
            DenseGrads g = dense_backward(regressor_head, ws.reg_cache, d_reg);
            grads[heads_base + 4] = std::move(g.weights);
            grads[heads_base + 5] = std::move(g.bias);
            for (std::size_t i = 0; i < d_trunk_out.size(); ++i) d_trunk_out[i] += g.input[i];
        }

        Tensor up = std::move(d_trunk_out);
        for (std::size_t i = t_layers; i-- > 0;) {
            DenseGrads g = dense_backward(trunk[i], ws.trunk_caches[i], up);
            grads[2 * i] = std::move(g.weights);
            grads[2 * i + 1] = std::move(g.bias);
            up = std::move(g.input);
        }

        // L2 penalty over dense weights (biases and generator excluded).
        if (lambda_l2 != 0.0) {
            auto add_l2 = [lambda_l2](Tensor& g, const Tensor& w) {
                for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * lambda_l2 * w[i];
            };
            for (std::size_t i = 0; i < t_layers; ++i) add_l2(grads[2 * i], trunk[i].weights);
            add_l2(grads[heads_base + 0], encoder_mean.weights);
            add_l2(grads[heads_base + 2], encoder_log_var.weights);
            add_l2(grads[heads_base + 4], regressor_head.weights);
            for (std::size_t j = 0; j < decoder.size(); ++j)
                add_l2(grads[decoder_base + 2 * j], decoder[j].weights);
        }
    }
};

}  // namespace vaereg
