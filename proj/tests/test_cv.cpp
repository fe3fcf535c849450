#include <catch2/catch.hpp>

#include <algorithm>

#include "vaereg/cross_validation.hpp"
#include "vaereg/synthetic.hpp"

using namespace vaereg;

namespace {

Dataset small_dataset(std::size_t n, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n = n;
    spec.dims = 4;
    spec.latent_dim = 2;
    spec.sigma_z = 0.1;
    spec.noise_x = 0.05;
    return generate_synthetic(spec, seed).dataset;
}

}  // namespace

TEST_CASE("k-fold assignment partitions the index set") {
    const std::vector<std::size_t> fold_of = kfold_assignment(10, 5, 3);
    REQUIRE(fold_of.size() == 10);
    std::vector<std::size_t> counts(5, 0);
    for (std::size_t f : fold_of) {
        REQUIRE(f < 5);
        ++counts[f];
    }
    for (std::size_t c : counts) REQUIRE(c == 2);

    // Uneven split: first n % k folds take the extra row.
    const std::vector<std::size_t> uneven = kfold_assignment(11, 5, 3);
    std::vector<std::size_t> counts2(5, 0);
    for (std::size_t f : uneven) ++counts2[f];
    std::sort(counts2.begin(), counts2.end());
    REQUIRE(counts2 == std::vector<std::size_t>{2, 2, 2, 2, 3});

    REQUIRE(kfold_assignment(10, 5, 3) == kfold_assignment(10, 5, 3));
    REQUIRE(kfold_assignment(10, 5, 3) != kfold_assignment(10, 5, 4));
    REQUIRE_THROWS_AS(kfold_assignment(4, 5, 0), DataError);
    REQUIRE_THROWS_AS(kfold_assignment(4, 1, 0), DataError);
}

TEST_CASE("constant-prediction method scores pooled r2 <= 0") {
    const Dataset data = small_dataset(40, 6);
    CvMethod constant{"const", [](const Tensor&, const std::vector<double>&, std::uint64_t) {
                          FitResult r;
                          r.predict = [](const Tensor& q) { return std::vector<double>(q.rows(), 0.0); };
                          return r;
                      }};
    const CvReport report = cross_validate(data, {constant}, 5, 11);
    REQUIRE(report.method("const").pooled.r2 <= 1e-12);
}

TEST_CASE("fold metrics and pooled metrics are populated for real methods") {
    const Dataset data = small_dataset(50, 8);
    const CvReport report = cross_validate(data, {method_linear(), method_ridge(), method_knn()}, 5, 21);

    for (const char* name : {"lr", "ridge", "knn"}) {
        const MethodReport& m = report.method(name);
        REQUIRE(m.per_fold.size() == 5);
        REQUIRE(m.pooled.rmse > 0.0);
        REQUIRE(m.pooled.r2 <= 1.0);
        for (const MethodFold& f : m.per_fold) REQUIRE(f.rmse >= 0.0);
    }
    const MethodReport& ridge = report.method("ridge");
    for (const MethodFold& f : ridge.per_fold) {
        REQUIRE(f.hyperparameters.contains("alpha"));
        const double alpha = f.hyperparameters["alpha"].get<double>();
        REQUIRE(alpha >= 1e-3);
        REQUIRE(alpha <= 1e4);
    }
    const MethodReport& knn = report.method("knn");
    for (const MethodFold& f : knn.per_fold) REQUIRE(f.hyperparameters.contains("k"));

    // Deterministic re-run.
    const CvReport again = cross_validate(data, {method_linear()}, 5, 21);
    REQUIRE(again.fold_assignment == report.fold_assignment);
    REQUIRE(again.method("lr").pooled.r2 == report.method("lr").pooled.r2);
    REQUIRE(again.method("lr").oof_predictions == report.method("lr").oof_predictions);
}

TEST_CASE("no leakage: fold models equal a leave-fold-out refit") {
    const Dataset data = small_dataset(45, 13);
    const std::size_t k = 5;
    const std::uint64_t seed = 97;
    const CvReport report = cross_validate(data, {method_ridge()}, k, seed);

    for (std::size_t f = 0; f < k; ++f) {
        // Rebuild the training view exactly as the harness does, from the
        // published fold assignment, and refit.
        std::vector<std::size_t> tr;
        for (std::size_t i = 0; i < data.n(); ++i)
            if (report.fold_assignment[i] != f) tr.push_back(i);
        const Standardization stats = Standardization::fit_rows(data.X, data.c, tr, data.feature_names);
        Tensor xtr = Tensor::matrix(tr.size(), data.dims());
        std::vector<double> ytr_raw(tr.size());
        for (std::size_t i = 0; i < tr.size(); ++i) {
            for (std::size_t j = 0; j < data.dims(); ++j) xtr(i, j) = data.X(tr[i], j);
            ytr_raw[i] = data.c[tr[i]];
        }
        xtr = stats.apply(xtr);
        const std::vector<double> ytr = stats.apply_target(ytr_raw);
        const std::uint64_t fit_seed = mix_seed(seed, seed_tag::method, f, std::uint64_t{0});
        const FitResult refit = method_ridge().fit(xtr, ytr, fit_seed);
        REQUIRE(refit.param_hash == report.method("ridge").per_fold[f].param_hash);
    }
}

TEST_CASE("report serialization carries the schema") {
    const Dataset data = small_dataset(30, 2);
    const CvReport report = cross_validate(data, {method_linear()}, 3, 5);

    const nlohmann::json j = report.to_json();
    REQUIRE(j["folds"] == 3);
    REQUIRE(j["methods"]["lr"]["per_fold"].size() == 3);
    REQUIRE(j["methods"]["lr"]["pooled"].contains("r2"));
    REQUIRE(j["methods"]["lr"]["pooled"].contains("rmse"));
    REQUIRE(j["methods"]["lr"]["fold_mean"].contains("r2"));
    REQUIRE(j["fold_assignment"].size() == 30);

    const std::string csv = report.to_csv();
    REQUIRE(csv.rfind("method,fold,r2,rmse\n", 0) == 0);
    REQUIRE(csv.find("lr,pooled,") != std::string::npos);
    REQUIRE(csv.find("lr,fold_mean,") != std::string::npos);
}

TEST_CASE("cross_validate rejects invalid fold counts") {
    const Dataset data = small_dataset(10, 3);
    REQUIRE_THROWS_AS(cross_validate(data, {method_linear()}, 11, 0), DataError);
}

TEST_CASE("vae and nn methods run end to end on a small dataset") {
    const Dataset data = small_dataset(40, 14);

    NnRegressorConfig nn;
    nn.trunk_dims = {8, 4};
    nn.epochs = 30;
    nn.batch_size = 16;

    VaeConfig arch;
    arch.trunk_dims = {8, 4};
    arch.latent_dim = 2;
    TrainConfig tc;
    tc.epochs = 30;
    tc.batch_size = 16;

    const CvReport report = cross_validate(data, {method_nn(nn), method_vae(arch, tc)}, 4, 3);
    REQUIRE(report.method("nn").per_fold.size() == 4);
    REQUIRE(report.method("vae").per_fold.size() == 4);
    REQUIRE(std::isfinite(report.method("vae").pooled.r2));

    // Determinism across reruns, including the trained methods.
    const CvReport again = cross_validate(data, {method_nn(nn), method_vae(arch, tc)}, 4, 3);
    REQUIRE(again.method("vae").oof_predictions == report.method("vae").oof_predictions);
    REQUIRE(again.method("nn").oof_predictions == report.method("nn").oof_predictions);
}
