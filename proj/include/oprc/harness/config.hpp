#pragma once

// Experiment configuration and its JSON (comments allowed) representation.

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "oprc/baselines/selection.hpp"
#include "oprc/reservoir.hpp"

namespace oprc {

struct ticker_source {
    std::string ticker;
    std::filesystem::path ohlc_path; ///< empty for synthetic tickers
};

struct experiment_config {
    std::vector<ticker_source> tickers;
    std::map<std::string, std::filesystem::path> macro_paths; ///< VIX, EFFR, UMCSENT, DXYNYB
    bool synthetic = false;       ///< generate every ticker with the synthetic task
    Eigen::Index synthetic_length = 600;

    std::vector<int> horizons{1, 4, 10};
    Eigen::Index train_len = 500;
    Eigen::Index test_len = 100;

    reservoir_config reservoir{};
    std::vector<real> readout_lambdas = log_grid(1e-8, 1e2);
    real validation_fraction = 0.2;
    bool tune_gains = false;
    std::vector<real> tune_alphas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<real> tune_betas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

    bool signed_weights = false;
    std::vector<model_spec> baselines = default_model_specs();
    int folds = 5;

    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 7;

    bool fetch_enabled = false;
    std::map<std::string, std::string> fetch_urls; ///< series name -> URL

    void validate() const {
        if (tickers.empty()) throw config_error("config: no tickers");
        if (horizons.empty()) throw config_error("config: no horizons");
        for (int h : horizons)
            if (h < 1) throw config_error("config: horizons must be >= 1");
        if (train_len < 2 || test_len < 1) throw config_error("config: invalid train/test lengths");
        reservoir.validate();
        if (reservoir.washout >= train_len) throw config_error("config: washout must be shorter than training");
        if (baselines.empty()) throw config_error("config: no baseline models");
        if (folds < 2) throw config_error("config: folds must be >= 2");
        if (!synthetic) {
            for (const auto& t : tickers)
                if (!std::filesystem::exists(t.ohlc_path))
                    throw config_error("config: data file for " + t.ticker + " not found: " + t.ohlc_path.string());
            for (auto name : macro_names) {
                auto it = macro_paths.find(std::string(name));
                if (it == macro_paths.end()) throw config_error("config: missing macro path for " + std::string(name));
                if (!std::filesystem::exists(it->second))
                    throw config_error("config: macro file not found: " + it->second.string());
            }
        }
    }
};

/// Derives an independent generator seed for one (ticker, horizon, stream).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view ticker, int horizon, std::string_view stream) {
    std::uint64_t h = mix_seed(master);
    h = mix_seed(h ^ fnv1a(ticker));
    h = mix_seed(h ^ static_cast<std::uint64_t>(horizon));
    h = mix_seed(h ^ fnv1a(stream));
    return h;
}

namespace detail {

inline nlohmann::json hyperparams_json(model_family f, const hyperparams& h) {
    nlohmann::json j = nlohmann::json::object();
    switch (f) {
    case model_family::ols: break;
    case model_family::ridge:
    case model_family::lasso: j["lambda"] = h.lambda; break;
    case model_family::elasticnet:
        j["l1"] = h.lambda;
        j["l2"] = h.l2;
        break;
    case model_family::knn: j["k"] = h.k; break;
    case model_family::decision_tree:
        j["max_depth"] = h.max_depth;
        j["min_leaf"] = h.min_leaf;
        break;
    case model_family::random_forest:
        j["n_trees"] = h.n_trees;
        j["max_depth"] = h.max_depth;
        j["min_leaf"] = h.min_leaf;
        j["feature_frac"] = h.feature_frac;
        break;
    }
    return j;
}

inline hyperparams hyperparams_from_json(const nlohmann::json& j) {
    hyperparams h;
    h.lambda = j.value("lambda", j.value("l1", h.lambda));
    h.l2 = j.value("l2", h.l2);
    h.k = j.value("k", h.k);
    h.max_depth = j.value("max_depth", h.max_depth);
    h.min_leaf = j.value("min_leaf", h.min_leaf);
    h.n_trees = j.value("n_trees", h.n_trees);
    h.feature_frac = j.value("feature_frac", h.feature_frac);
    return h;
}

} // namespace detail

/// Canonical JSON form; also the input of `fingerprint`.
inline nlohmann::json to_json(const experiment_config& c) {
    nlohmann::json j;
    j["seed"] = c.seed;
    j["synthetic"] = c.synthetic;
    j["synthetic_length"] = c.synthetic_length;
    j["horizons"] = c.horizons;
    j["train_len"] = c.train_len;
    j["test_len"] = c.test_len;
    nlohmann::json tickers = nlohmann::json::array();
    for (const auto& t : c.tickers) tickers.push_back({{"ticker", t.ticker}, {"ohlc", t.ohlc_path.generic_string()}});
    j["tickers"] = tickers;
    nlohmann::json macros = nlohmann::json::object();
    for (const auto& [k, v] : c.macro_paths) macros[k] = v.generic_string();
    j["macro"] = macros;
    const auto& r = c.reservoir;
    j["reservoir"] = {{"alpha", r.alpha},
                      {"beta", r.beta},
                      {"grid", r.geometry.grid},
                      {"block", r.geometry.block},
                      {"nodes", r.nodes},
                      {"saturation", r.saturation},
                      {"saturation_factor", r.saturation_factor},
                      {"bits", r.bits},
                      {"washout", r.washout}};
    j["readout"] = {{"lambdas", c.readout_lambdas}, {"validation_fraction", c.validation_fraction}};
    j["tune_gains"] = {{"enabled", c.tune_gains}, {"alphas", c.tune_alphas}, {"betas", c.tune_betas}};
    j["features"] = {{"signed_weights", c.signed_weights}};
    nlohmann::json models = nlohmann::json::array();
    for (const auto& s : c.baselines) {
        nlohmann::json grid = nlohmann::json::array();
        for (const auto& h : s.grid) grid.push_back(detail::hyperparams_json(s.family, h));
        models.push_back({{"family", std::string(to_string(s.family))}, {"grid", grid}});
    }
    j["baselines"] = {{"folds", c.folds}, {"models", models}};
    j["fetch"] = {{"enabled", c.fetch_enabled}, {"urls", c.fetch_urls}};
    return j;
}

/// Hex FNV-1a of the canonical JSON, excluding the output directory.
inline std::string fingerprint(const experiment_config& c) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(c).dump())));
    return buf;
}

/// Parses a config document.  Relative paths resolve against `base_dir`.
inline experiment_config config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    experiment_config c;
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    try {
        c.seed = j.value("seed", c.seed);
        c.synthetic = j.value("synthetic", c.synthetic);
        c.synthetic_length = j.value("synthetic_length", c.synthetic_length);
        if (j.contains("horizons")) c.horizons = j.at("horizons").get<std::vector<int>>();
        c.train_len = j.value("train_len", c.train_len);
        c.test_len = j.value("test_len", c.test_len);
        if (j.contains("output_dir")) c.output_dir = resolve(j.at("output_dir").get<std::string>());
        if (j.contains("tickers")) {
            const auto& t = j.at("tickers");
            if (t.is_object()) {
                for (const auto& [name, path] : t.items()) c.tickers.push_back({name, resolve(path.get<std::string>())});
            } else {
                for (const auto& e : t) {
                    if (e.is_string()) {
                        c.tickers.push_back({e.get<std::string>(), {}});
                    } else {
                        ticker_source s{e.at("ticker").get<std::string>(), {}};
                        if (e.contains("ohlc")) s.ohlc_path = resolve(e.at("ohlc").get<std::string>());
                        c.tickers.push_back(s);
                    }
                }
            }
        }
        if (j.contains("macro"))
            for (const auto& [name, path] : j.at("macro").items()) c.macro_paths[name] = resolve(path.get<std::string>());
        if (j.contains("reservoir")) {
            const auto& r = j.at("reservoir");
            auto& rc = c.reservoir;
            rc.alpha = r.value("alpha", rc.alpha);
            rc.beta = r.value("beta", rc.beta);
            rc.geometry.grid = r.value("grid", rc.geometry.grid);
            rc.geometry.block = r.value("block", rc.geometry.block);
            rc.nodes = r.value("nodes", rc.nodes);
            rc.saturation = r.value("saturation", rc.saturation);
            rc.saturation_factor = r.value("saturation_factor", rc.saturation_factor);
            rc.bits = r.value("bits", rc.bits);
            rc.washout = r.value("washout", rc.washout);
        }
        if (j.contains("readout")) {
            const auto& r = j.at("readout");
            if (r.contains("lambdas")) c.readout_lambdas = r.at("lambdas").get<std::vector<real>>();
            c.validation_fraction = r.value("validation_fraction", c.validation_fraction);
        }
        if (j.contains("tune_gains")) {
            const auto& t = j.at("tune_gains");
            c.tune_gains = t.value("enabled", c.tune_gains);
            if (t.contains("alphas")) c.tune_alphas = t.at("alphas").get<std::vector<real>>();
            if (t.contains("betas")) c.tune_betas = t.at("betas").get<std::vector<real>>();
        }
        if (j.contains("features")) c.signed_weights = j.at("features").value("signed_weights", c.signed_weights);
        if (j.contains("baselines")) {
            const auto& b = j.at("baselines");
            c.folds = b.value("folds", c.folds);
            if (b.contains("models")) {
                c.baselines.clear();
                for (const auto& m : b.at("models")) {
                    model_spec s{parse_family(m.at("family").get<std::string>()), {}};
                    if (m.contains("grid"))
                        for (const auto& g : m.at("grid")) s.grid.push_back(detail::hyperparams_from_json(g));
                    else
                        s.grid.push_back({});
                    c.baselines.push_back(s);
                }
            }
        }
        if (j.contains("fetch")) {
            const auto& f = j.at("fetch");
            c.fetch_enabled = f.value("enabled", c.fetch_enabled);
            if (f.contains("urls")) c.fetch_urls = f.at("urls").get<std::map<std::string, std::string>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    return c;
}

inline experiment_config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config '" + path.string() + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config '" + path.string() + "': " + e.what());
    }
    auto base = std::filesystem::absolute(path).parent_path();
    auto c = config_from_json(j, base);
    if (!j.contains("output_dir")) c.output_dir = base / "out";
    return c;
}

} // namespace oprc
