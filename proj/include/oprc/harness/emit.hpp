#pragma once

// CSV / JSON emission of predictions and metrics.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "oprc/harness/experiment.hpp"

namespace oprc {

namespace detail {

/// Shortest round-trip representation.
inline std::string fmt_real(real v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "NA" : (v > 0 ? "inf" : "-inf");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write '" + path.string() + "'");
    return out;
}

inline void close_out(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) throw io_error("write failed for '" + path.string() + "'");
}

} // namespace detail

/// File-system safe version of a ticker ("^NYA" -> "_NYA").
inline std::string ticker_slug(std::string_view ticker) {
    std::string s;
    for (char c : ticker) s += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
    return s;
}

/// `date,horizon_step,true,rc_cw,rc,best_ml,best_ml_name`; rows are anchors x steps.
inline void emit_predictions(const prediction_result& r, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << "date,horizon_step,true,rc_cw,rc,best_ml,best_ml_name\n";
    const bool has_ml = r.best_ml.size() > 0;
    for (std::size_t i = 0; i < r.dates.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        for (int s = 0; s < r.horizon; ++s) {
            out << format_iso_date(r.dates[i]) << ',' << (s + 1) << ',' << detail::fmt_real(r.y_true(row, s)) << ','
                << detail::fmt_real(r.rc_cw(row, s)) << ',' << detail::fmt_real(r.rc(row, s)) << ','
                << (has_ml ? detail::fmt_real(r.best_ml(row, s)) : "NA") << ','
                << (has_ml ? detail::csv_field(r.best_ml_name) : "NA") << '\n';
        }
    }
    detail::close_out(out, path);
}

inline std::string er_column_name(int horizon) { return "er_" + std::to_string(horizon) + "step"; }

/// Writes metrics.csv, metrics_steps.csv, er.csv, er_bars.csv, selection.csv,
/// cells.csv and manifest.json into `dir`.
inline void emit_metrics(const metrics_report& rep, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io_error("cannot create '" + dir.string() + "': " + ec.message());
    using detail::csv_field;
    using detail::fmt_real;

    {
        auto p = dir / "metrics.csv";
        auto out = detail::open_out(p);
        out << "ticker,horizon,model,family,nrmse\n";
        for (const auto& m : rep.metrics)
            out << csv_field(m.ticker) << ',' << m.horizon << ',' << m.model << ',' << m.family << ',' << fmt_real(m.nrmse) << '\n';
        detail::close_out(out, p);
    }
    {
        auto p = dir / "metrics_steps.csv";
        auto out = detail::open_out(p);
        out << "ticker,horizon,model,step,nrmse\n";
        for (const auto& m : rep.steps)
            out << csv_field(m.ticker) << ',' << m.horizon << ',' << m.model << ',' << m.step << ',' << fmt_real(m.nrmse) << '\n';
        detail::close_out(out, p);
    }
    {
        auto p = dir / "er.csv";
        auto out = detail::open_out(p);
        out << "ticker,horizon,nrmse_rc_cw,nrmse_best_ml,best_ml,er\n";
        for (const auto& e : rep.er)
            out << csv_field(e.ticker) << ',' << e.horizon << ',' << fmt_real(e.nrmse_rc_cw) << ','
                << fmt_real(e.nrmse_best_ml) << ',' << e.best_ml << ',' << fmt_real(e.er) << '\n';
        detail::close_out(out, p);
    }
    {
        // ticker x horizon grid; missing cells are NA.
        auto p = dir / "er_bars.csv";
        auto out = detail::open_out(p);
        out << "ticker";
        for (int h : rep.horizons) out << ',' << er_column_name(h);
        out << '\n';
        for (const auto& t : rep.tickers) {
            out << csv_field(t);
            for (int h : rep.horizons) {
                auto v = rep.error_reduction_of(t, h);
                out << ',' << (v ? fmt_real(*v) : "NA");
            }
            out << '\n';
        }
        detail::close_out(out, p);
    }
    {
        auto p = dir / "selection.csv";
        auto out = detail::open_out(p);
        out << "ticker,horizon,family,params,cv_nrmse,selected\n";
        for (const auto& s : rep.selection)
            out << csv_field(s.ticker) << ',' << s.horizon << ',' << s.family << ',' << csv_field(s.params) << ','
                << fmt_real(s.cv_nrmse) << ',' << (s.selected ? 1 : 0) << '\n';
        detail::close_out(out, p);
    }
    {
        auto p = dir / "cells.csv";
        auto out = detail::open_out(p);
        out << "ticker,horizon,alpha,beta,lambda_rc_cw,lambda_rc";
        for (int j = 0; j < n_features; ++j) out << ",cw" << j;
        out << '\n';
        for (const auto& c : rep.cells) {
            out << csv_field(c.ticker) << ',' << c.horizon << ',' << fmt_real(c.alpha) << ',' << fmt_real(c.beta) << ','
                << fmt_real(c.lambda_cw) << ',' << fmt_real(c.lambda_unit);
            for (Eigen::Index j = 0; j < c.cw.size(); ++j) out << ',' << fmt_real(c.cw[j]);
            out << '\n';
        }
        detail::close_out(out, p);
    }
    {
        nlohmann::json m;
        m["fingerprint"] = rep.fingerprint;
        m["seed"] = rep.seed;
        m["tickers"] = rep.tickers;
        m["horizons"] = rep.horizons;
        m["complete"] = rep.failures.empty();
        nlohmann::json f = nlohmann::json::array();
        for (const auto& e : rep.failures) f.push_back({{"ticker", e.ticker}, {"horizon", e.horizon}, {"error", e.message}});
        m["failures"] = f;
        m["warnings"] = rep.warnings;
        auto p = dir / "manifest.json";
        auto out = detail::open_out(p);
        out << m.dump(2) << '\n';
        detail::close_out(out, p);
    }
}

/// Reads metrics.csv back into rows.
inline std::vector<metric_row> parse_metrics_csv(const std::filesystem::path& path) {
    auto lines = detail::read_lines(path.string());
    if (lines.empty() || lines.front() != "ticker,horizon,model,family,nrmse")
        throw parse_error(path.string() + ": unexpected metrics header");
    std::vector<metric_row> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = detail::split_csv_line(lines[i]);
        if (f.size() != 5) throw parse_error(path.string() + ":" + std::to_string(i + 1) + ": expected 5 fields");
        rows.push_back({f[0], std::stoi(f[1]), f[2], f[3], detail::parse_real(f[4], path.string())});
    }
    return rows;
}

/// Runs all cells and writes metrics plus one prediction file per cell.
inline experiment_outcome run_experiment(const experiment_config& cfg, bool write = true) {
    experiment_outcome out = run_cells(cfg);
    if (write) {
        emit_metrics(out.report, cfg.output_dir);
        for (const auto& p : out.predictions)
            emit_predictions(p, cfg.output_dir / ("predictions_" + ticker_slug(p.ticker) + "_h" + std::to_string(p.horizon) + ".csv"));
    }
    return out;
}

/// The desk-scale substitute for market data: one synthetic ticker through
/// the full pipeline at 500/100 and horizons 1, 4, 10.
inline experiment_config synthetic_suite_config(std::uint64_t seed) {
    experiment_config cfg;
    cfg.synthetic = true;
    cfg.tickers = {{"NARMA2", {}}};
    cfg.seed = seed;
    return cfg;
}

inline metrics_report run_synthetic_suite(std::uint64_t seed) {
    return run_experiment(synthetic_suite_config(seed), false).report;
}

} // namespace oprc
