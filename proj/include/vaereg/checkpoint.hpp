#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vaereg/dataset.hpp"
#include "vaereg/errors.hpp"
#include "vaereg/tensor.hpp"
#include "vaereg/util.hpp"
#include "vaereg/vae_regressor.hpp"

namespace vaereg {

// Everything needed to resume inference: architecture, weights, generator,
// standardization statistics and the run seed. Serialized as a single JSON
// document with sorted keys, so save -> load -> save is byte-identical.
struct Checkpoint {
    VaeRegressor model;
    Standardization standardization;
    std::vector<std::string> feature_names;
    std::string target_name = "target";
    std::uint64_t seed = 0;
};

namespace detail {

inline nlohmann::json tensor_to_json(const Tensor& t) {
    return {{"shape", t.shape()}, {"values", t.values()}};
}

inline Tensor tensor_from_json(const nlohmann::json& j) {
    Tensor t(j.at("shape").get<std::vector<std::size_t>>());
    const auto vals = j.at("values").get<std::vector<double>>();
    if (vals.size() != t.size()) throw DataError("checkpoint: tensor value count mismatch");
    for (std::size_t i = 0; i < vals.size(); ++i) t[i] = vals[i];
    return t;
}

}  // namespace detail

inline nlohmann::json checkpoint_to_json(Checkpoint& cp) {
    nlohmann::json j;
    j["format"] = "vaereg-checkpoint-v1";
    j["seed"] = cp.seed;

    std::vector<std::size_t> trunk_dims;
    for (const DenseLayer& l : cp.model.trunk) trunk_dims.push_back(l.out_dim());
    j["architecture"] = {{"input_dim", cp.model.input_dim},
                         {"trunk", trunk_dims},
                         {"latent_dim", cp.model.latent_dim}};
    // log_sigma is the stored parameterization (exact round trip); sigma is
    // derived on every save, so repeated saves stay byte-identical.
    j["generator"] = {{"log_sigma", cp.model.generator.log_sigma[0]},
                      {"sigma", cp.model.generator.sigma()},
                      {"learn_sigma", cp.model.generator.learn_sigma}};

    nlohmann::json params = nlohmann::json::object();
    for (const ParamRef& p : cp.model.parameters()) params[p.name] = detail::tensor_to_json(*p.value);
    j["parameters"] = params;

    j["standardization"] = {{"feature_names", cp.feature_names},
                            {"feature_mean", cp.standardization.feature_mean},
                            {"feature_std", cp.standardization.feature_std},
                            {"target_name", cp.target_name},
                            {"target_mean", cp.standardization.target_mean},
                            {"target_std", cp.standardization.target_std}};
    return j;
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
    if (j.at("format").get<std::string>() != "vaereg-checkpoint-v1")
        throw DataError("checkpoint: unknown format tag");
    Checkpoint cp;
    cp.seed = j.at("seed").get<std::uint64_t>();

    VaeConfig cfg;
    cfg.input_dim = j.at("architecture").at("input_dim").get<std::size_t>();
    cfg.trunk_dims = j.at("architecture").at("trunk").get<std::vector<std::size_t>>();
    cfg.latent_dim = j.at("architecture").at("latent_dim").get<std::size_t>();
    cfg.learn_sigma = j.at("generator").at("learn_sigma").get<bool>();
    Rng rng(0);
    cp.model = VaeRegressor::build(cfg, rng);
    cp.model.generator.log_sigma[0] = j.at("generator").at("log_sigma").get<double>();
    for (const ParamRef& p : cp.model.parameters()) {
        const auto it = j.at("parameters").find(p.name);
        if (it == j.at("parameters").end()) throw DataError("checkpoint: missing parameter " + p.name);
        Tensor t = detail::tensor_from_json(*it);
        if (!t.same_shape(*p.value)) throw DataError("checkpoint: shape mismatch for " + p.name);
        *p.value = std::move(t);
    }
    cp.model.trained = true;

    const nlohmann::json& s = j.at("standardization");
    cp.feature_names = s.at("feature_names").get<std::vector<std::string>>();
    cp.target_name = s.at("target_name").get<std::string>();
    cp.standardization.feature_mean = s.at("feature_mean").get<std::vector<double>>();
    cp.standardization.feature_std = s.at("feature_std").get<std::vector<double>>();
    cp.standardization.target_mean = s.at("target_mean").get<double>();
    cp.standardization.target_std = s.at("target_std").get<double>();
    if (cp.feature_names.size() != cp.model.input_dim ||
        cp.standardization.feature_mean.size() != cp.model.input_dim ||
        cp.standardization.feature_std.size() != cp.model.input_dim)
        throw DataError("checkpoint: standardization width does not match input_dim");
    return cp;
}

inline void save_checkpoint(const std::filesystem::path& path, Checkpoint& cp) {
    write_file(path, checkpoint_to_json(cp).dump(2) + "\n");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("checkpoint parse failure in " + path.string() + ": " + e.what());
    }
    try {
        return checkpoint_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed checkpoint " + path.string() + ": " + e.what());
    }
}

}  // namespace vaereg
