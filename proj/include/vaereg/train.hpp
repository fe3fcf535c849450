#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "vaereg/adam.hpp"
#include "vaereg/errors.hpp"
#include "vaereg/gaussian.hpp"
#include "vaereg/rng.hpp"
#include "vaereg/tensor.hpp"
#include "vaereg/util.hpp"
#include "vaereg/vae_regressor.hpp"

namespace vaereg {

struct TrainConfig {
    std::size_t epochs = 300;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double lambda_l2 = 0.0;
    std::uint64_t seed = 0;
    KlMode kl_mode = KlMode::analytic;
    std::size_t mc_samples = 1;
    std::size_t log_every = 10;
    TermWeights term_weights{};
    bool quiet = true;
};

struct EpochRecord {
    std::size_t epoch = 0;
    ElboTerms terms;     // per-sample means over the epoch's minibatches
    double u_norm = 0.0; // after the epoch's projection steps
    double wall_ms = 0.0;
};

struct TrainTrace {
    std::vector<EpochRecord> epochs;

    std::string to_csv() const {
        std::ostringstream out;
        out << "epoch,label_loglik,recon_loglik,expected_kl,l2,total,wall_ms\n";
        for (const EpochRecord& r : epochs) {
            out << r.epoch << ',' << format_double(r.terms.label_loglik) << ','
                << format_double(r.terms.recon_loglik) << ',' << format_double(r.terms.expected_kl) << ','
                << format_double(r.terms.l2_penalty) << ',' << format_double(r.terms.total_loss) << ','
                << format_double(r.wall_ms) << '\n';
        }
        return out.str();
    }

    void write_csv(const std::filesystem::path& path) const { write_file(path, to_csv()); }
};

// Deterministic permutation of 0..n-1 for a given (n, epoch, seed).
inline std::vector<std::size_t> shuffle_indices(std::size_t n, std::uint64_t epoch, std::uint64_t seed) {
    if (n < 1) throw DimensionError("shuffle_indices: n must be >= 1");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(mix_seed(seed, seed_tag::shuffle, epoch, n));
    for (std::size_t i = n; i-- > 1;) std::swap(idx[i], idx[rng.uniform_index(i + 1)]);
    return idx;
}

// Minibatch optimization of the supervised bound. Expects standardized
// features and targets. Every Adam step is followed by renormalization of
// the generator direction. Deterministic given (data, config).
inline TrainTrace train(VaeRegressor& model, const Tensor& x_std, const std::vector<double>& c_std,
                        const TrainConfig& cfg) {
    const std::size_t n = x_std.rows();
    if (c_std.size() != n) throw DimensionError("train: target count does not match feature rows");
    if (cfg.batch_size < 1 || cfg.batch_size > n)
        throw TrainingError("train: batch_size must be in [1, dataset size]");
    if (cfg.kl_mode == KlMode::mc && cfg.mc_samples < 1)
        throw TrainingError("train: mc mode needs mc_samples >= 1");

    TrainTrace trace;
    if (cfg.epochs == 0) return trace;

    std::vector<ParamRef> params = model.parameters();
    AdamState adam = AdamState::for_params(params, cfg.learning_rate);
    GradientTape tape;
    const std::size_t latent = model.latent_dim;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<std::size_t> order = shuffle_indices(n, epoch, cfg.seed);
        ElboTerms epoch_terms;
        for (std::size_t start = 0, batch_index = 0; start < n; start += cfg.batch_size, ++batch_index) {
            const std::size_t b = std::min(cfg.batch_size, n - start);
            Tensor xb = Tensor::matrix(b, x_std.cols());
            std::vector<double> cb(b);
            for (std::size_t r = 0; r < b; ++r) {
                const std::size_t src = order[start + r];
                const double* row = x_std.row_data(src);
                double* dst = xb.row_data(r);
                for (std::size_t j = 0; j < x_std.cols(); ++j) dst[j] = row[j];
                cb[r] = c_std[src];
            }

            // Dedicated noise stream per (seed, epoch, batch); eps_z is drawn
            // first so switching kl modes never perturbs it.
            Rng eps_rng(mix_seed(cfg.seed, seed_tag::eps, epoch, batch_index));
            Tensor eps_z = Tensor::matrix(b, latent);
            for (double& v : eps_z.values()) v = eps_rng.normal();
            Tensor eps_c;
            if (cfg.kl_mode == KlMode::mc) {
                eps_c = Tensor::matrix(b, cfg.mc_samples);
                for (double& v : eps_c.values()) v = eps_rng.normal();
            }

            ElboTerms terms;
            try {
                terms = model.loss_and_grad(xb, cb, eps_z, eps_c, cfg.lambda_l2, cfg.kl_mode, tape,
                                            cfg.term_weights);
            } catch (const TrainingError& e) {
                throw TrainingError("epoch " + std::to_string(epoch) + " batch " +
                                    std::to_string(batch_index) + ": " + e.what());
            }

            double gmax = 0.0;
            for (const Tensor& g : tape.grads) gmax = std::max(gmax, g.max_abs());
            if (gmax > 1e3)
                std::cerr << "[train] warning: max |grad| = " << gmax << " at epoch " << epoch << " batch "
                          << batch_index << "\n";

            adam_step(params, tape.grads, adam);
            model.generator.renormalize();

            const double w = static_cast<double>(b) / static_cast<double>(n);
            epoch_terms.label_loglik += w * terms.label_loglik;
            epoch_terms.recon_loglik += w * terms.recon_loglik;
            epoch_terms.expected_kl += w * terms.expected_kl;
            epoch_terms.l2_penalty += w * terms.l2_penalty;
            epoch_terms.total_loss += w * terms.total_loss;
        }
        const auto t1 = std::chrono::steady_clock::now();
        EpochRecord rec;
        rec.epoch = epoch;
        rec.terms = epoch_terms;
        rec.u_norm = model.generator.u_norm();
        rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        trace.epochs.push_back(rec);
        if (!cfg.quiet && cfg.log_every > 0 && (epoch % cfg.log_every == 0 || epoch + 1 == cfg.epochs))
            std::cerr << "[train] epoch " << epoch << " total " << epoch_terms.total_loss << " label "
                      << epoch_terms.label_loglik << " recon " << epoch_terms.recon_loglik << " kl "
                      << epoch_terms.expected_kl << "\n";
    }
    model.trained = true;
    return trace;
}

}  // namespace vaereg
