#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vaereg/errors.hpp"
#include "vaereg/util.hpp"

namespace vaereg {

// Key-value config with [section] headers, '#' comments and 'key = value'
// lines. Section and key names are validated against the known schema; an
// unknown name is an error, not a silent ignore.
struct ConfigFile {
    // section -> key -> value; top-level keys live under "".
    std::map<std::string, std::map<std::string, std::string>> sections;

    static ConfigFile parse_text(const std::string& text, const std::string& origin = "<string>") {
        ConfigFile cfg;
        std::istringstream in(text);
        std::string line, section;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section header");
                section = trim(t.substr(1, t.size() - 2));
                cfg.sections[section];
                continue;
            }
            const std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
            const std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (key.empty()) throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
            cfg.sections[section][key] = value;
        }
        return cfg;
    }

    static ConfigFile parse(const std::filesystem::path& path) {
        if (!std::filesystem::exists(path)) throw ConfigError("missing config file: " + path.string());
        return parse_text(read_file(path), path.string());
    }

private:
    static std::string trim(const std::string& s) {
        const std::size_t a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        const std::size_t b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }
};

namespace detail {

inline double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const char* b = s.data();
    auto res = std::from_chars(b, b + s.size(), v);
    if (res.ec != std::errc() || res.ptr != b + s.size() || !std::isfinite(v))
        throw ConfigError(where + ": expected a finite number, got '" + s + "'");
    return v;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& where) {
    std::uint64_t v = 0;
    const char* b = s.data();
    auto res = std::from_chars(b, b + s.size(), v);
    if (res.ec != std::errc() || res.ptr != b + s.size())
        throw ConfigError(where + ": expected a non-negative integer, got '" + s + "'");
    return v;
}

inline bool parse_bool(const std::string& s, const std::string& where) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError(where + ": expected true/false, got '" + s + "'");
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        const std::size_t a = item.find_first_not_of(" \t");
        const std::size_t b = item.find_last_not_of(" \t");
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

inline std::vector<std::size_t> parse_size_list(const std::string& s, const std::string& where) {
    std::vector<std::size_t> out;
    for (const std::string& item : split_list(s))
        out.push_back(static_cast<std::size_t>(parse_u64(item, where)));
    if (out.empty()) throw ConfigError(where + ": expected a comma-separated list");
    return out;
}

}  // namespace detail

struct SyntheticSection {
    std::size_t n = 500;
    std::size_t dims = 30;
    std::size_t latent_dim = 8;
    double c_lo = 18.0;
    double c_hi = 86.0;
    double sigma_z = 0.1;
    double noise_x = 0.05;
    std::uint64_t decoder_seed = 7;
};

struct ModelSection {
    std::vector<std::size_t> trunk = {128, 32};
    std::size_t latent_dim = 8;
    double sigma = 1.0;
    bool learn_sigma = false;
};

struct TrainSection {
    std::size_t epochs = 300;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double lambda_l2 = 0.0;
    std::string kl_mode = "analytic";
    std::size_t mc_samples = 1;
    std::size_t log_every = 10;
    double w_label = 1.0;
    double w_recon = 1.0;
    double w_kl = 1.0;
};

struct DataSection {
    std::string csv;
    std::string target = "target";
};

struct CvSection {
    std::size_t folds = 5;
    std::vector<std::string> methods = {"lr", "ridge", "knn", "nn", "vae"};
    std::size_t inner_folds = 5;
};

struct TraverseSection {
    std::string checkpoint;
    double c_lo = 18.0;
    double c_hi = 86.0;
    std::size_t points = 11;
};

struct PredictSection {
    std::string checkpoint;
};

struct ProjectSection {
    std::string checkpoint;
};

struct RunConfig {
    std::uint64_t seed = 0;
    SyntheticSection synthetic;
    ModelSection model;
    TrainSection train;
    DataSection data;
    CvSection cv;
    TraverseSection traverse;
    PredictSection predict;
    ProjectSection project;

    static RunConfig from_file(const std::filesystem::path& path) {
        return from_config(ConfigFile::parse(path), path.string());
    }

    static RunConfig from_config(const ConfigFile& cfg, const std::string& origin) {
        RunConfig rc;
        for (const auto& [section, keys] : cfg.sections) {
            for (const auto& [key, value] : keys) {
                const std::string where = origin + ": [" + section + "] " + key;
                if (!rc.assign(section, key, value, where))
                    throw ConfigError(where + ": unknown configuration key");
            }
        }
        return rc;
    }

    // Canonical echo of every effective value; written next to all outputs.
    std::string resolved() const {
        std::ostringstream o;
        o << "seed = " << seed << "\n\n";
        o << "[synthetic]\n"
          << "n = " << synthetic.n << "\ndims = " << synthetic.dims
          << "\nlatent_dim = " << synthetic.latent_dim << "\nc_lo = " << format_double(synthetic.c_lo)
          << "\nc_hi = " << format_double(synthetic.c_hi)
          << "\nsigma_z = " << format_double(synthetic.sigma_z)
          << "\nnoise_x = " << format_double(synthetic.noise_x)
          << "\ndecoder_seed = " << synthetic.decoder_seed << "\n\n";
        o << "[model]\ntrunk = ";
        for (std::size_t i = 0; i < model.trunk.size(); ++i) o << (i ? "," : "") << model.trunk[i];
        o << "\nlatent_dim = " << model.latent_dim << "\nsigma = " << format_double(model.sigma)
          << "\nlearn_sigma = " << (model.learn_sigma ? "true" : "false") << "\n\n";
        o << "[train]\nepochs = " << train.epochs << "\nbatch_size = " << train.batch_size
          << "\nlearning_rate = " << format_double(train.learning_rate)
          << "\nlambda_l2 = " << format_double(train.lambda_l2) << "\nkl_mode = " << train.kl_mode
          << "\nmc_samples = " << train.mc_samples << "\nlog_every = " << train.log_every
          << "\nw_label = " << format_double(train.w_label) << "\nw_recon = " << format_double(train.w_recon)
          << "\nw_kl = " << format_double(train.w_kl) << "\n\n";
        o << "[data]\ncsv = " << data.csv << "\ntarget = " << data.target << "\n\n";
        o << "[cv]\nfolds = " << cv.folds << "\nmethods = ";
        for (std::size_t i = 0; i < cv.methods.size(); ++i) o << (i ? "," : "") << cv.methods[i];
        o << "\ninner_folds = " << cv.inner_folds << "\n\n";
        o << "[predict]\ncheckpoint = " << predict.checkpoint << "\n\n";
        o << "[traverse]\ncheckpoint = " << traverse.checkpoint
          << "\nc_lo = " << format_double(traverse.c_lo) << "\nc_hi = " << format_double(traverse.c_hi)
          << "\npoints = " << traverse.points << "\n\n";
        o << "[project]\ncheckpoint = " << project.checkpoint << "\n";
        return o.str();
    }

private:
    bool assign(const std::string& section, const std::string& key, const std::string& v,
                const std::string& w) {
        using namespace detail;
        if (section.empty()) {
            if (key == "seed") return seed = parse_u64(v, w), true;
            return false;
        }
        if (section == "synthetic") {
            if (key == "n") return synthetic.n = parse_u64(v, w), true;
            if (key == "dims") return synthetic.dims = parse_u64(v, w), true;
            if (key == "latent_dim") return synthetic.latent_dim = parse_u64(v, w), true;
            if (key == "c_lo") return synthetic.c_lo = parse_double(v, w), true;
            if (key == "c_hi") return synthetic.c_hi = parse_double(v, w), true;
            if (key == "sigma_z") return synthetic.sigma_z = parse_double(v, w), true;
            if (key == "noise_x") return synthetic.noise_x = parse_double(v, w), true;
            if (key == "decoder_seed") return synthetic.decoder_seed = parse_u64(v, w), true;
            return false;
        }
        if (section == "model") {
            if (key == "trunk") return model.trunk = parse_size_list(v, w), true;
            if (key == "latent_dim") return model.latent_dim = parse_u64(v, w), true;
            if (key == "sigma") return model.sigma = parse_double(v, w), true;
            if (key == "learn_sigma") return model.learn_sigma = parse_bool(v, w), true;
            return false;
        }
        if (section == "train") {
            if (key == "epochs") return train.epochs = parse_u64(v, w), true;
            if (key == "batch_size") return train.batch_size = parse_u64(v, w), true;
            if (key == "learning_rate") return train.learning_rate = parse_double(v, w), true;
            if (key == "lambda_l2") return train.lambda_l2 = parse_double(v, w), true;
            if (key == "kl_mode") return train.kl_mode = v, true;
            if (key == "mc_samples") return train.mc_samples = parse_u64(v, w), true;
            if (key == "log_every") return train.log_every = parse_u64(v, w), true;
            if (key == "w_label") return train.w_label = parse_double(v, w), true;
            if (key == "w_recon") return train.w_recon = parse_double(v, w), true;
            if (key == "w_kl") return train.w_kl = parse_double(v, w), true;
            return false;
        }
        if (section == "data") {
            if (key == "csv") return data.csv = v, true;
            if (key == "target") return data.target = v, true;
            return false;
        }
        if (section == "cv") {
            if (key == "folds") return cv.folds = parse_u64(v, w), true;
            if (key == "methods") return cv.methods = split_list(v), true;
            if (key == "inner_folds") return cv.inner_folds = parse_u64(v, w), true;
            return false;
        }
        if (section == "predict") {
            if (key == "checkpoint") return predict.checkpoint = v, true;
            return false;
        }
        if (section == "traverse") {
            if (key == "checkpoint") return traverse.checkpoint = v, true;
            if (key == "c_lo") return traverse.c_lo = parse_double(v, w), true;
            if (key == "c_hi") return traverse.c_hi = parse_double(v, w), true;
            if (key == "points") return traverse.points = parse_u64(v, w), true;
            return false;
        }
        if (section == "project") {
            if (key == "checkpoint") return project.checkpoint = v, true;
            return false;
        }
        return false;
    }
};

}  // namespace vaereg
