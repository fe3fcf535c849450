#pragma once

#include <cstdint>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vaereg/baselines.hpp"
#include "vaereg/dataset.hpp"
#include "vaereg/errors.hpp"
#include "vaereg/metrics.hpp"
#include "vaereg/rng.hpp"
#include "vaereg/tensor.hpp"
#include "vaereg/train.hpp"
#include "vaereg/util.hpp"
#include "vaereg/vae_regressor.hpp"

namespace vaereg {

// A fitted predictor working in standardized feature/target space; the
// harness de-standardizes predictions before computing metrics.
struct FitResult {
    std::function<std::vector<double>(const Tensor&)> predict;
    nlohmann::json hyperparameters = nlohmann::json::object();
    std::uint64_t param_hash = 0;
};

struct CvMethod {
    std::string name;
    std::function<FitResult(const Tensor& x_std, const std::vector<double>& y_std, std::uint64_t seed)> fit;
};

struct MethodMetrics {
    double r2 = 0.0;
    double rmse = 0.0;
};

struct MethodFold {
    std::size_t fold = 0;
    double r2 = 0.0;
    double rmse = 0.0;
    nlohmann::json hyperparameters = nlohmann::json::object();
    std::uint64_t param_hash = 0;
    std::uint64_t fit_seed = 0;
};

struct MethodReport {
    std::string name;
    std::vector<MethodFold> per_fold;
    MethodMetrics pooled;     // concatenated out-of-fold predictions
    MethodMetrics fold_mean;  // mean of per-fold metrics
    std::vector<double> oof_predictions;  // raw target units, original row order
};

struct CvReport {
    std::size_t folds = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> fold_assignment;
    std::vector<MethodReport> methods;

    const MethodReport& method(const std::string& name) const {
        for (const MethodReport& m : methods)
            if (m.name == name) return m;
        throw DataError("no such method in report: " + name);
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["folds"] = folds;
        j["seed"] = seed;
        j["fold_assignment"] = fold_assignment;
        nlohmann::json jm = nlohmann::json::object();
        for (const MethodReport& m : methods) {
            nlohmann::json entry;
            entry["per_fold"] = nlohmann::json::array();
            for (const MethodFold& f : m.per_fold) {
                entry["per_fold"].push_back({{"fold", f.fold},
                                             {"r2", f.r2},
                                             {"rmse", f.rmse},
                                             {"hyperparameters", f.hyperparameters},
                                             {"param_hash", f.param_hash},
                                             {"fit_seed", f.fit_seed}});
            }
            entry["pooled"] = {{"r2", m.pooled.r2}, {"rmse", m.pooled.rmse}};
            entry["fold_mean"] = {{"r2", m.fold_mean.r2}, {"rmse", m.fold_mean.rmse}};
            jm[m.name] = entry;
        }
        j["methods"] = jm;
        return j;
    }

    std::string to_csv() const {
        std::ostringstream out;
        out << "method,fold,r2,rmse\n";
        for (const MethodReport& m : methods) {
            for (const MethodFold& f : m.per_fold)
                out << m.name << ',' << f.fold << ',' << format_double(f.r2) << ','
                    << format_double(f.rmse) << '\n';
            out << m.name << ",fold_mean," << format_double(m.fold_mean.r2) << ','
                << format_double(m.fold_mean.rmse) << '\n';
            out << m.name << ",pooled," << format_double(m.pooled.r2) << ',' << format_double(m.pooled.rmse)
                << '\n';
        }
        return out.str();
    }
};

// Seeded shuffled k-fold assignment; depends only on (n, k, seed).
inline std::vector<std::size_t> kfold_assignment(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2 || k > n) throw DataError("k-fold: need 2 <= k <= n");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(mix_seed(seed, seed_tag::folds, n, k));
    for (std::size_t i = n; i-- > 1;) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
    std::vector<std::size_t> fold_of(n);
    const std::size_t base = n / k, extra = n % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) fold_of[perm[pos++]] = f;
    }
    return fold_of;
}

namespace detail {

inline Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& rows) {
    Tensor out = Tensor::matrix(rows.size(), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* src = x.row_data(rows[i]);
        double* dst = out.row_data(i);
        for (std::size_t j = 0; j < x.cols(); ++j) dst[j] = src[j];
    }
    return out;
}

template <class T>
std::vector<T> gather(const std::vector<T>& v, const std::vector<std::size_t>& rows) {
    std::vector<T> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(v[r]);
    return out;
}

// Pooled rMSE of a fit/predict routine under an inner k-fold split
// (standardized space; used for hyperparameter grids).
template <class FitPredict>
double inner_cv_rmse(const Tensor& x, const std::vector<double>& y, std::size_t k, std::uint64_t seed,
                     FitPredict&& fit_predict) {
    const std::size_t n = x.rows();
    const std::size_t folds = std::min(k, n);
    if (folds < 2) throw DataError("inner cv: need at least 2 rows");
    const std::vector<std::size_t> fold_of = kfold_assignment(n, folds, seed);
    std::vector<double> pred(n, 0.0);
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> tr, te;
        for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? te : tr).push_back(i);
        const Tensor xtr = gather_rows(x, tr), xte = gather_rows(x, te);
        const std::vector<double> ytr = gather(y, tr);
        const std::vector<double> p = fit_predict(xtr, ytr, xte);
        for (std::size_t i = 0; i < te.size(); ++i) pred[te[i]] = p[i];
    }
    return rmse(y, pred);
}

}  // namespace detail

// Nested cross-validation: per outer fold, statistics are fit on the
// training rows only, every method is fit (with its inner-CV hyperparameter
// search where configured) and evaluated on the held-out rows. Pooled
// metrics use the concatenated out-of-fold predictions; per-fold metrics and
// their mean are also reported.
inline CvReport cross_validate(const Dataset& data, const std::vector<CvMethod>& methods, std::size_t k,
                               std::uint64_t seed) {
    data.validate();
    const std::size_t n = data.n();
    if (k > n) throw DataError("cross_validate: k exceeds dataset size");
    CvReport report;
    report.folds = k;
    report.seed = seed;
    report.fold_assignment = kfold_assignment(n, k, seed);
    report.methods.resize(methods.size());
    for (std::size_t j = 0; j < methods.size(); ++j) {
        report.methods[j].name = methods[j].name;
        report.methods[j].oof_predictions.assign(n, 0.0);
    }

    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> tr, te;
        for (std::size_t i = 0; i < n; ++i) (report.fold_assignment[i] == f ? te : tr).push_back(i);
        const Standardization stats = Standardization::fit_rows(data.X, data.c, tr, data.feature_names);
        const Tensor xtr = stats.apply(detail::gather_rows(data.X, tr));
        const Tensor xte = stats.apply(detail::gather_rows(data.X, te));
        const std::vector<double> ytr_raw = detail::gather(data.c, tr);
        const std::vector<double> yte_raw = detail::gather(data.c, te);
        const std::vector<double> ytr = stats.apply_target(ytr_raw);

        for (std::size_t j = 0; j < methods.size(); ++j) {
            const std::uint64_t fit_seed = mix_seed(seed, seed_tag::method, f, j);
            FitResult fit = methods[j].fit(xtr, ytr, fit_seed);
            std::vector<double> pred_std = fit.predict(xte);
            std::vector<double> pred(pred_std.size());
            for (std::size_t i = 0; i < pred.size(); ++i)
                pred[i] = stats.destandardize_target(pred_std[i]);

            MethodFold fold;
            fold.fold = f;
            fold.r2 = r2_score(yte_raw, pred);
            fold.rmse = rmse(yte_raw, pred);
            fold.hyperparameters = fit.hyperparameters;
            fold.param_hash = fit.param_hash;
            fold.fit_seed = fit_seed;
            report.methods[j].per_fold.push_back(fold);
            for (std::size_t i = 0; i < te.size(); ++i)
                report.methods[j].oof_predictions[te[i]] = pred[i];
        }
    }

    for (MethodReport& m : report.methods) {
        m.pooled.r2 = r2_score(data.c, m.oof_predictions);
        m.pooled.rmse = rmse(data.c, m.oof_predictions);
        double sr2 = 0.0, srmse = 0.0;
        for (const MethodFold& fm : m.per_fold) {
            sr2 += fm.r2;
            srmse += fm.rmse;
        }
        m.fold_mean.r2 = sr2 / static_cast<double>(k);
        m.fold_mean.rmse = srmse / static_cast<double>(k);
    }
    return report;
}

// ---- Method factories -----------------------------------------------------

inline CvMethod method_linear() {
    return {"lr", [](const Tensor& x, const std::vector<double>& y, std::uint64_t) {
                LinearModel m = fit_linear(x, y, 0.0);
                FitResult r;
                std::uint64_t h = hash_doubles(m.coefficients);
                r.param_hash = hash_bytes(&m.intercept, sizeof(double), h);
                r.predict = [m](const Tensor& q) { return m.predict(q); };
                return r;
            }};
}

// Ridge alpha grid 1e-3..1e4, chosen by inner 5-fold CV (pooled rMSE,
// ties to the smaller alpha).
inline std::vector<double> ridge_alpha_grid() {
    return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4};
}

inline CvMethod method_ridge(std::size_t inner_folds = 5) {
    return {"ridge", [inner_folds](const Tensor& x, const std::vector<double>& y, std::uint64_t seed) {
                double best_alpha = ridge_alpha_grid().front();
                double best_rmse = 0.0;
                bool first = true;
                for (double alpha : ridge_alpha_grid()) {
                    const double score = detail::inner_cv_rmse(
                        x, y, inner_folds, mix_seed(seed, 0xA1FA),
                        [alpha](const Tensor& xtr, const std::vector<double>& ytr, const Tensor& xte) {
                            return fit_linear(xtr, ytr, alpha).predict(xte);
                        });
                    if (first || score < best_rmse) {
                        best_rmse = score;
                        best_alpha = alpha;
                        first = false;
                    }
                }
                LinearModel m = fit_linear(x, y, best_alpha);
                FitResult r;
                r.hyperparameters = {{"alpha", best_alpha}};
                std::uint64_t h = hash_doubles(m.coefficients);
                r.param_hash = hash_bytes(&m.intercept, sizeof(double), h);
                r.predict = [m](const Tensor& q) { return m.predict(q); };
                return r;
            }};
}

inline std::vector<std::size_t> knn_k_grid() { return {1, 5, 10, 50}; }

inline CvMethod method_knn(std::size_t inner_folds = 5) {
    return {"knn", [inner_folds](const Tensor& x, const std::vector<double>& y, std::uint64_t seed) {
                std::size_t best_k = 1;
                double best_rmse = 0.0;
                bool first = true;
                for (std::size_t kk : knn_k_grid()) {
                    if (kk > x.rows() - x.rows() / inner_folds) continue;  // must fit inner train size
                    const double score = detail::inner_cv_rmse(
                        x, y, inner_folds, mix_seed(seed, 0xB2FB),
                        [kk](const Tensor& xtr, const std::vector<double>& ytr, const Tensor& xte) {
                            return predict_knn(fit_knn(xtr, ytr, std::min(kk, xtr.rows())), xte);
                        });
                    if (first || score < best_rmse) {
                        best_rmse = score;
                        best_k = kk;
                        first = false;
                    }
                }
                KnnModel m = fit_knn(x, y, std::min(best_k, x.rows()));
                FitResult r;
                r.hyperparameters = {{"k", m.k}};
                r.param_hash = hash_doubles(m.train_y, hash_bytes(&m.k, sizeof(m.k)));
                r.predict = [m](const Tensor& q) { return predict_knn(m, q); };
                return r;
            }};
}

inline CvMethod method_nn(NnRegressorConfig base) {
    return {"nn", [base](const Tensor& x, const std::vector<double>& y, std::uint64_t seed) {
                NnRegressorConfig cfg = base;
                cfg.seed = seed;
                cfg.batch_size = std::min(cfg.batch_size, x.rows());
                NnRegressor m = fit_nn_regressor(x, y, cfg);
                FitResult r;
                std::uint64_t h = 1469598103934665603ULL;
                for (const ParamRef& p : m.parameters()) h = hash_doubles(p.value->values(), h);
                r.param_hash = h;
                auto shared = std::make_shared<NnRegressor>(std::move(m));
                r.predict = [shared](const Tensor& q) { return shared->predict(q); };
                return r;
            }};
}

inline CvMethod method_vae(VaeConfig arch, TrainConfig train_cfg, std::string name = "vae") {
    return {std::move(name), [arch, train_cfg](const Tensor& x, const std::vector<double>& y, std::uint64_t seed) {
                VaeConfig cfg = arch;
                cfg.input_dim = x.cols();
                TrainConfig tc = train_cfg;
                tc.seed = seed;
                tc.batch_size = std::min(tc.batch_size, x.rows());
                Rng init_rng(mix_seed(seed, seed_tag::init));
                auto model = std::make_shared<VaeRegressor>(VaeRegressor::build(cfg, init_rng));
                train(*model, x, y, tc);
                FitResult r;
                std::uint64_t h = 1469598103934665603ULL;
                for (const ParamRef& p : model->parameters()) h = hash_doubles(p.value->values(), h);
                r.param_hash = h;
                r.predict = [model](const Tensor& q) {
                    const GaussianParams g = model->regress(q);
                    std::vector<double> out(q.rows());
                    for (std::size_t i = 0; i < q.rows(); ++i) out[i] = g.mean(i, 0);
                    return out;
                };
                return r;
            }};
}

}  // namespace vaereg
