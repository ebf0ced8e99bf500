// Command-line driver for the reservoir forecasting experiment.
//
//   oprc run --config configs/example.jsonc [--seed N] [--out DIR]
//            [--tickers a,b] [--horizons 1,4,10] [--synthetic]
//
// Exit status: 0 when every cell succeeded, 1 when some cells failed (see
// manifest.json), 2 on configuration or I/O errors.

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

#include "oprc/fetch.hpp"
#include "oprc/harness/emit.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted spatial reservoir computing experiment"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run the forecasting experiment");
    std::string config_path, out_dir, tickers, horizons;
    std::optional<std::uint64_t> seed;
    bool synthetic = false;
    run->add_option("--config", config_path, "Experiment config (JSON, comments allowed)");
    run->add_option("--seed", seed, "Master seed");
    run->add_option("--out", out_dir, "Output directory (overrides OPRC_OUT_DIR and the config)");
    run->add_option("--tickers", tickers, "Comma-separated ticker subset");
    run->add_option("--horizons", horizons, "Comma-separated horizons, e.g. 1,4,10");
    run->add_flag("--synthetic", synthetic, "Use the synthetic NARMA task instead of CSV data");

    CLI11_PARSE(app, argc, argv);

    try {
        oprc::experiment_config cfg;
        if (!config_path.empty()) {
            cfg = oprc::load_config(config_path);
        } else if (!synthetic) {
            std::cerr << "run: --config is required unless --synthetic is given\n";
            return 2;
        } else {
            cfg = oprc::synthetic_suite_config(cfg.seed);
        }
        if (synthetic) {
            cfg.synthetic = true;
            if (cfg.tickers.empty()) cfg.tickers = {{"NARMA2", {}}};
        }
        if (seed) cfg.seed = *seed;
        if (!tickers.empty()) {
            auto wanted = split_list(tickers);
            std::vector<oprc::ticker_source> chosen;
            for (const auto& w : wanted) {
                auto it = std::find_if(cfg.tickers.begin(), cfg.tickers.end(), [&](const auto& t) { return t.ticker == w; });
                if (it != cfg.tickers.end())
                    chosen.push_back(*it);
                else if (cfg.synthetic)
                    chosen.push_back({w, {}});
                else
                    throw oprc::config_error("ticker '" + w + "' is not in the config");
            }
            cfg.tickers = chosen;
        }
        if (!horizons.empty()) {
            cfg.horizons.clear();
            for (const auto& h : split_list(horizons)) cfg.horizons.push_back(std::stoi(h));
        }
        if (const char* env = std::getenv("OPRC_OUT_DIR"); env && *env) cfg.output_dir = env;
        if (!out_dir.empty()) cfg.output_dir = out_dir;

        if (cfg.fetch_enabled) {
            for (const auto& [name, url] : cfg.fetch_urls) {
                std::filesystem::path dest;
                if (auto m = cfg.macro_paths.find(name); m != cfg.macro_paths.end()) dest = m->second;
                for (const auto& t : cfg.tickers)
                    if (t.ticker == name) dest = t.ohlc_path;
                if (dest.empty()) throw oprc::config_error("fetch: no data path configured for '" + name + "'");
                std::cerr << "fetching " << name << " -> " << dest << '\n';
                oprc::fetch_csv(url, dest);
            }
        }

        auto outcome = oprc::run_experiment(cfg);
        const auto& rep = outcome.report;
        for (const auto& e : rep.er)
            std::cout << e.ticker << " h=" << e.horizon << "  rc_cw=" << e.nrmse_rc_cw << "  best_ml(" << e.best_ml
                      << ")=" << e.nrmse_best_ml << "  ER=" << e.er << '\n';
        for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
        for (const auto& f : rep.failures) std::cerr << "failed: " << f.ticker << " h=" << f.horizon << ": " << f.message << '\n';
        std::cout << "outputs written to " << cfg.output_dir.string() << '\n';
        return rep.failures.empty() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
