// Command-line entry point: reproducible data generation, training,
// cross-validation and latent-space interpretation, driven by a config file
// with flag overrides (flags win).

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vaereg/vaereg.hpp"
#include "vaereg/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::int64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Path to the run config file")->required();
    cmd->add_option("--seed", args.seed, "Override the config seed");
    cmd->add_option("--out", args.out_dir, "Output directory (created if missing)");
}

vaereg::RunConfig load_config(const CommonArgs& args) {
    vaereg::RunConfig cfg = vaereg::RunConfig::from_file(args.config_path);
    if (args.seed) cfg.seed = static_cast<std::uint64_t>(*args.seed);
    return cfg;
}

fs::path prepare_out_dir(const CommonArgs& args, const vaereg::RunConfig& cfg, const std::string& command) {
    fs::path out(args.out_dir);
    fs::create_directories(out);
    vaereg::write_file(out / (command + ".resolved.cfg"), cfg.resolved());
    return out;
}

void require_input_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw vaereg::ConfigError(what + " path is not configured");
    if (!fs::exists(path)) throw vaereg::ConfigError("missing " + what + ": " + path);
}

vaereg::SyntheticSpec to_spec(const vaereg::RunConfig& cfg) {
    vaereg::SyntheticSpec spec;
    spec.n = cfg.synthetic.n;
    spec.dims = cfg.synthetic.dims;
    spec.latent_dim = cfg.synthetic.latent_dim;
    spec.c_lo = cfg.synthetic.c_lo;
    spec.c_hi = cfg.synthetic.c_hi;
    spec.sigma_z = cfg.synthetic.sigma_z;
    spec.noise_x = cfg.synthetic.noise_x;
    spec.decoder_seed = cfg.synthetic.decoder_seed;
    return spec;
}

vaereg::VaeConfig to_vae_config(const vaereg::RunConfig& cfg, std::size_t input_dim) {
    vaereg::VaeConfig mc;
    mc.input_dim = input_dim;
    mc.trunk_dims = cfg.model.trunk;
    mc.latent_dim = cfg.model.latent_dim;
    mc.sigma = cfg.model.sigma;
    mc.learn_sigma = cfg.model.learn_sigma;
    return mc;
}

vaereg::TrainConfig to_train_config(const vaereg::RunConfig& cfg) {
    vaereg::TrainConfig tc;
    tc.epochs = cfg.train.epochs;
    tc.batch_size = cfg.train.batch_size;
    tc.learning_rate = cfg.train.learning_rate;
    tc.lambda_l2 = cfg.train.lambda_l2;
    tc.seed = cfg.seed;
    tc.kl_mode = vaereg::kl_mode_from_string(cfg.train.kl_mode);
    tc.mc_samples = cfg.train.mc_samples;
    tc.log_every = cfg.train.log_every;
    tc.term_weights = {cfg.train.w_label, cfg.train.w_recon, cfg.train.w_kl};
    return tc;
}

int cmd_gen_data(const CommonArgs& args, bool with_truth) {
    vaereg::RunConfig cfg = load_config(args);
    vaereg::SyntheticSpec spec = to_spec(cfg);
    spec.validate();
    const fs::path out = prepare_out_dir(args, cfg, "gen-data");
    vaereg::SyntheticData data = vaereg::generate_synthetic(spec, cfg.seed);
    const fs::path csv_path = out / "data.csv";
    vaereg::write_csv(csv_path, data.dataset);
    json summary = {{"command", "gen-data"}, {"rows", data.dataset.n()},   {"dims", data.dataset.dims()},
                    {"seed", cfg.seed},      {"csv", csv_path.string()}};
    if (with_truth) {
        json truth = {{"u_true", data.truth.u_true},
                      {"c_mean", data.truth.c_mean},
                      {"c_sd", data.truth.c_sd},
                      {"c_std", data.truth.c_std},
                      {"z", json::array()}};
        for (std::size_t i = 0; i < data.truth.z.rows(); ++i) {
            json row = json::array();
            for (std::size_t j = 0; j < data.truth.z.cols(); ++j) row.push_back(data.truth.z(i, j));
            truth["z"].push_back(row);
        }
        const fs::path truth_path = out / "data_truth.json";
        vaereg::write_file(truth_path, truth.dump(2) + "\n");
        summary["truth"] = truth_path.string();
    }
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_train(const CommonArgs& args) {
    vaereg::RunConfig cfg = load_config(args);
    require_input_file(cfg.data.csv, "dataset csv");
    const fs::path out = prepare_out_dir(args, cfg, "train");

    vaereg::Dataset raw = vaereg::load_csv(cfg.data.csv, cfg.data.target);
    vaereg::Dataset std_data = vaereg::standardize(raw);

    vaereg::Rng init_rng(vaereg::mix_seed(cfg.seed, vaereg::seed_tag::init));
    vaereg::VaeRegressor model = vaereg::VaeRegressor::build(to_vae_config(cfg, raw.dims()), init_rng);
    vaereg::TrainConfig tc = to_train_config(cfg);
    tc.quiet = false;
    vaereg::TrainTrace trace = vaereg::train(model, std_data.X, std_data.c, tc);
    model.trained = true;

    vaereg::Checkpoint cp;
    cp.model = std::move(model);
    cp.standardization = *std_data.standardization;
    cp.feature_names = raw.feature_names;
    cp.target_name = raw.target_name;
    cp.seed = cfg.seed;
    const fs::path cp_path = out / "checkpoint.json";
    vaereg::save_checkpoint(cp_path, cp);
    const fs::path trace_path = out / "trace.csv";
    trace.write_csv(trace_path);

    const vaereg::GaussianParams pred = cp.model.regress(std_data.X);
    std::vector<double> mean_raw(raw.n());
    for (std::size_t i = 0; i < raw.n(); ++i)
        mean_raw[i] = cp.standardization.destandardize_target(pred.mean(i, 0));
    const double train_r2 = vaereg::r2_score(raw.c, mean_raw);

    json summary = {{"command", "train"},   {"seed", cfg.seed},
                    {"epochs", tc.epochs},  {"checkpoint", cp_path.string()},
                    {"trace", trace_path.string()}, {"train_r2", train_r2}};
    if (!trace.epochs.empty()) {
        const vaereg::ElboTerms& t = trace.epochs.back().terms;
        summary["final"] = {{"label_loglik", t.label_loglik},
                            {"recon_loglik", t.recon_loglik},
                            {"expected_kl", t.expected_kl},
                            {"l2", t.l2_penalty},
                            {"total", t.total_loss}};
        summary["u_norm"] = trace.epochs.back().u_norm;
    }
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_cv(const CommonArgs& args) {
    vaereg::RunConfig cfg = load_config(args);
    require_input_file(cfg.data.csv, "dataset csv");
    const fs::path out = prepare_out_dir(args, cfg, "cv");

    vaereg::Dataset data = vaereg::load_csv(cfg.data.csv, cfg.data.target);

    std::vector<vaereg::CvMethod> methods;
    for (const std::string& name : cfg.cv.methods) {
        if (name == "lr") {
            methods.push_back(vaereg::method_linear());
        } else if (name == "ridge") {
            methods.push_back(vaereg::method_ridge(cfg.cv.inner_folds));
        } else if (name == "knn") {
            methods.push_back(vaereg::method_knn(cfg.cv.inner_folds));
        } else if (name == "nn") {
            vaereg::NnRegressorConfig nn;
            nn.trunk_dims = cfg.model.trunk;
            nn.epochs = cfg.train.epochs;
            nn.batch_size = cfg.train.batch_size;
            nn.learning_rate = cfg.train.learning_rate;
            nn.lambda_l2 = cfg.train.lambda_l2;
            methods.push_back(vaereg::method_nn(nn));
        } else if (name == "vae") {
            methods.push_back(vaereg::method_vae(to_vae_config(cfg, 0), to_train_config(cfg)));
        } else {
            throw vaereg::ConfigError("unknown cv method '" + name + "'");
        }
    }

    vaereg::CvReport report = vaereg::cross_validate(data, methods, cfg.cv.folds, cfg.seed);
    const fs::path json_path = out / "cv_report.json";
    vaereg::write_file(json_path, report.to_json().dump(2) + "\n");
    const fs::path csv_path = out / "cv_report.csv";
    vaereg::write_file(csv_path, report.to_csv());

    json summary = {{"command", "cv"},
                    {"seed", cfg.seed},
                    {"folds", cfg.cv.folds},
                    {"report_json", json_path.string()},
                    {"report_csv", csv_path.string()},
                    {"pooled", json::object()}};
    for (const vaereg::MethodReport& m : report.methods)
        summary["pooled"][m.name] = {{"r2", m.pooled.r2}, {"rmse", m.pooled.rmse}};
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_predict(const CommonArgs& args) {
    vaereg::RunConfig cfg = load_config(args);
    require_input_file(cfg.predict.checkpoint, "checkpoint");
    require_input_file(cfg.data.csv, "dataset csv");
    const fs::path out = prepare_out_dir(args, cfg, "predict");

    vaereg::Checkpoint cp = vaereg::load_checkpoint(cfg.predict.checkpoint);
    vaereg::Dataset data = vaereg::load_csv(cfg.data.csv, cfg.data.target);
    data = vaereg::align_features(data, cp.feature_names);
    const vaereg::Tensor x_std = cp.standardization.apply(data.X);
    const vaereg::GaussianParams pred = cp.model.regress(x_std);

    std::ostringstream csv;
    csv << "id,mean,std\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double mean = cp.standardization.destandardize_target(pred.mean(i, 0));
        const double sd = std::exp(0.5 * pred.log_var(i, 0)) * cp.standardization.target_std;
        csv << i << ',' << vaereg::format_double(mean) << ',' << vaereg::format_double(sd) << '\n';
    }
    const fs::path pred_path = out / "predictions.csv";
    vaereg::write_file(pred_path, csv.str());

    json summary = {{"command", "predict"}, {"rows", data.n()}, {"predictions", pred_path.string()}};
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_traverse(const CommonArgs& args) {
    vaereg::RunConfig cfg = load_config(args);
    require_input_file(cfg.traverse.checkpoint, "checkpoint");
    const fs::path out = prepare_out_dir(args, cfg, "traverse");

    vaereg::Checkpoint cp = vaereg::load_checkpoint(cfg.traverse.checkpoint);
    if (cfg.traverse.points < 1) throw vaereg::ConfigError("[traverse] points must be >= 1");
    std::vector<double> grid;
    if (cfg.traverse.points == 1) {
        grid.push_back(cfg.traverse.c_lo);
    } else {
        const double step = (cfg.traverse.c_hi - cfg.traverse.c_lo) /
                            static_cast<double>(cfg.traverse.points - 1);
        for (std::size_t i = 0; i < cfg.traverse.points; ++i)
            grid.push_back(cfg.traverse.c_lo + step * static_cast<double>(i));
    }
    const vaereg::TraversalResult res = vaereg::traverse(cp.model, cp.standardization, grid);

    std::ostringstream csv;
    csv << "c";
    for (const std::string& f : cp.feature_names) csv << ',' << f;
    csv << '\n';
    for (std::size_t i = 0; i < res.grid.size(); ++i) {
        csv << vaereg::format_double(res.grid[i]);
        for (std::size_t j = 0; j < res.decoded.cols(); ++j)
            csv << ',' << vaereg::format_double(res.decoded(i, j));
        csv << '\n';
    }
    const fs::path path = out / "traversal.csv";
    vaereg::write_file(path, csv.str());

    json summary = {{"command", "traverse"}, {"points", res.grid.size()}, {"traversal", path.string()}};
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_project(const CommonArgs& args) {
    vaereg::RunConfig cfg = load_config(args);
    require_input_file(cfg.project.checkpoint, "checkpoint");
    require_input_file(cfg.data.csv, "dataset csv");
    const fs::path out = prepare_out_dir(args, cfg, "project");

    vaereg::Checkpoint cp = vaereg::load_checkpoint(cfg.project.checkpoint);
    vaereg::Dataset data = vaereg::load_csv(cfg.data.csv, cfg.data.target);
    data = vaereg::align_features(data, cp.feature_names);
    const vaereg::Tensor x_std = cp.standardization.apply(data.X);
    const vaereg::GaussianParams latents = cp.model.encode(x_std);
    const vaereg::ProjectionResult proj = vaereg::project_2d(latents.mean, data.c);
    const double score = vaereg::disentanglement_score(latents.mean, cp.model.generator.u, data.c);

    std::ostringstream csv;
    csv << "pc1,pc2,target\n";
    for (std::size_t i = 0; i < data.n(); ++i)
        csv << vaereg::format_double(proj.coords(i, 0)) << ',' << vaereg::format_double(proj.coords(i, 1))
            << ',' << vaereg::format_double(data.c[i]) << '\n';
    const fs::path csv_path = out / "projection.csv";
    vaereg::write_file(csv_path, csv.str());

    json meta = {{"explained_variance_ratio",
                  {proj.explained_variance_ratio[0], proj.explained_variance_ratio[1]}},
                 {"components", {proj.components[0], proj.components[1]}},
                 {"disentanglement_score", score}};
    const fs::path meta_path = out / "projection_meta.json";
    vaereg::write_file(meta_path, meta.dump(2) + "\n");

    json summary = {{"command", "project"},
                    {"rows", data.n()},
                    {"projection", csv_path.string()},
                    {"meta", meta_path.string()},
                    {"disentanglement_score", score}};
    std::cout << summary.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"VAE-based regression: training, baselines and latent-space interpretation"};
    app.require_subcommand(1);

    CommonArgs gen_args, train_args, predict_args, cv_args, traverse_args, project_args;
    bool with_truth = false;

    CLI::App* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset CSV");
    add_common(gen, gen_args);
    gen->add_flag("--with-truth", with_truth, "Also write the hidden ground-truth sidecar");

    CLI::App* tr = app.add_subcommand("train", "Train the model on a CSV dataset");
    add_common(tr, train_args);

    CLI::App* pr = app.add_subcommand("predict", "Predict mean and uncertainty from a checkpoint");
    add_common(pr, predict_args);

    CLI::App* cv = app.add_subcommand("cv", "Cross-validate the model against baselines");
    add_common(cv, cv_args);

    CLI::App* tv = app.add_subcommand("traverse", "Decode latents along the target direction");
    add_common(tv, traverse_args);

    CLI::App* pj = app.add_subcommand("project", "2D projection of latent representations");
    add_common(pj, project_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_data(gen_args, with_truth);
        if (tr->parsed()) return cmd_train(train_args);
        if (pr->parsed()) return cmd_predict(predict_args);
        if (cv->parsed()) return cmd_cv(cv_args);
        if (tv->parsed()) return cmd_traverse(traverse_args);
        if (pj->parsed()) return cmd_project(project_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
