#pragma once

// One experiment cell = (ticker, horizon).  Fitting sees only the training
// slice; evaluation continues the reservoir trajectories into the test slice.

#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "oprc/baselines/selection.hpp"
#include "oprc/baselines/supervised.hpp"
#include "oprc/features.hpp"
#include "oprc/harness/config.hpp"
#include "oprc/harness/synthetic.hpp"
#include "oprc/readout.hpp"
#include "oprc/reservoir.hpp"

namespace oprc {

/// Test-slice predictions in price units; one row per anchor.
struct prediction_result {
    std::string ticker;
    int horizon = 1;
    std::vector<calendar_day> dates; ///< anchor dates
    mat y_true;
    mat rc_cw;
    mat rc;
    mat best_ml;
    std::string best_ml_name;
};

/// A reservoir plus its trained readout, positioned at the last training anchor.
struct rc_branch {
    reservoir res;
    readout_weights readout;
    lambda_choice lambda;
    vec last_state;
};

struct trained_cell {
    int horizon = 1;
    normalizer norm;
    correlation_weights cw;
    real alpha = 0, beta = 0;
    std::optional<rc_branch> weighted;
    std::optional<rc_branch> unweighted;
    std::optional<selection_result> baseline;
};

namespace detail {

/// Drives a fresh reservoir over all anchors of the normalized training frame
/// and trains its readout on the anchors whose targets are inside training.
inline rc_branch fit_rc_branch(const feature_frame& train_n, int h, reservoir_config rc,
                               const correlation_weights& cw, const experiment_config& cfg) {
    reservoir res(rc, cw, n_features * h);
    const Eigen::Index first = h - 1;
    const Eigen::Index last_anchor = train_n.rows() - 1;    // last anchor with inputs in train
    const Eigen::Index last_fit = train_n.rows() - 1 - h;   // last anchor with targets in train
    const Eigen::Index fit_begin = first + rc.washout;
    if (last_fit < fit_begin + 4)
        throw length_error("reservoir: training slice too short for washout " + std::to_string(rc.washout));

    mat states(last_fit - fit_begin + 1, rc.nodes);
    mat targets(states.rows(), h);
    vec s;
    for (Eigen::Index t = first; t <= last_anchor; ++t) {
        s = res.step(stacked_inputs(train_n, t, h));
        if (t >= fit_begin && t <= last_fit) {
            states.row(t - fit_begin) = s.transpose();
            targets.row(t - fit_begin) = train_n.target.segment(t + 1, h).transpose();
        }
    }
    auto choice = select_ridge_lambda(states, targets, cfg.readout_lambdas, cfg.validation_fraction);
    auto w = train_ridge(states, targets, choice.lambda);
    return {std::move(res), std::move(w), choice, s};
}

} // namespace detail

/// Fits normalizer, correlation weights, both reservoir readouts and the best
/// baseline from the training slice alone.
inline trained_cell fit_cell(const feature_frame& train, int h, const experiment_config& cfg,
                             std::string_view ticker, bool run_baselines = true) {
    trained_cell cell;
    cell.horizon = h;
    cell.norm = fit_normalizer(train);
    cell.cw = compute_correlation_weights(train, cfg.signed_weights);
    const feature_frame train_n = cell.norm.apply(train);

    reservoir_config rc = cfg.reservoir;
    rc.seed = derive_seed(cfg.seed, ticker, h, "reservoir");
    if (cfg.tune_gains) {
        real best = std::numeric_limits<real>::infinity();
        reservoir_config best_rc = rc;
        for (real a : cfg.tune_alphas)
            for (real b : cfg.tune_betas) {
                reservoir_config trial = rc;
                trial.alpha = a;
                trial.beta = b;
                auto br = detail::fit_rc_branch(train_n, h, trial, cell.cw, cfg);
                if (br.lambda.validation_nrmse < best) {
                    best = br.lambda.validation_nrmse;
                    best_rc = trial;
                }
            }
        rc = best_rc;
    }
    cell.alpha = rc.alpha;
    cell.beta = rc.beta;
    cell.weighted = detail::fit_rc_branch(train_n, h, rc, cell.cw, cfg);
    cell.unweighted = detail::fit_rc_branch(train_n, h, rc, correlation_weights::unit(n_features), cfg);

    if (run_baselines) {
        supervised_set sup = build_supervised(train_n, h);
        cell.baseline = select_best_model(cfg.baselines, sup, cfg.folds, derive_seed(cfg.seed, ticker, h, "baseline"));
    }
    return cell;
}

/// Predicts every test anchor: anchors whose first target is the first test
/// day through the last anchor with all targets inside test.
inline prediction_result evaluate_cell(trained_cell& cell, const feature_frame& train, const feature_frame& test,
                                       std::string_view ticker) {
    const int h = cell.horizon;
    const feature_frame all_n = cell.norm.apply(concat(train, test));
    const Eigen::Index first = train.rows() - 1;
    const Eigen::Index last = all_n.rows() - 1 - h;
    if (last < first) throw length_error("evaluate: test slice shorter than the horizon");
    const Eigen::Index n = last - first + 1;

    prediction_result out;
    out.ticker = std::string(ticker);
    out.horizon = h;
    out.y_true.resize(n, h);
    mat x(n, n_features * h);
    mat s_w(n, cell.weighted->readout.inputs()), s_u(n, cell.unweighted->readout.inputs());
    s_w.row(0) = cell.weighted->last_state.transpose();
    s_u.row(0) = cell.unweighted->last_state.transpose();
    for (Eigen::Index t = first; t <= last; ++t) {
        const auto r = t - first;
        vec u = stacked_inputs(all_n, t, h);
        x.row(r) = u.transpose();
        if (r > 0) {
            s_w.row(r) = cell.weighted->res.step(u).transpose();
            s_u.row(r) = cell.unweighted->res.step(u).transpose();
        }
        out.y_true.row(r) = test.target.segment(t + 1 - train.rows(), h).transpose();
        out.dates.push_back(all_n.dates[static_cast<std::size_t>(t)]);
    }
    out.rc_cw = cell.norm.unscale_target(predict(cell.weighted->readout, s_w));
    out.rc = cell.norm.unscale_target(predict(cell.unweighted->readout, s_u));
    if (cell.baseline) {
        out.best_ml = cell.norm.unscale_target(cell.baseline->model.predict(x));
        out.best_ml_name = cell.baseline->model.name();
    }
    return out;
}

// --- report --------------------------------------------------------------

struct metric_row {
    std::string ticker;
    int horizon = 0;
    std::string model;  ///< rc_cw, rc or best_ml
    std::string family; ///< reservoir or the selected baseline family
    real nrmse = 0;
};

struct step_row {
    std::string ticker;
    int horizon = 0;
    std::string model;
    int step = 0;
    real nrmse = 0;
};

struct er_row {
    std::string ticker;
    int horizon = 0;
    real nrmse_rc_cw = 0;
    real nrmse_best_ml = 0;
    std::string best_ml;
    real er = 0;
};

struct selection_row {
    std::string ticker;
    int horizon = 0;
    std::string family;
    std::string params;
    real cv_nrmse = 0;
    bool selected = false;
};

struct cell_info {
    std::string ticker;
    int horizon = 0;
    real alpha = 0, beta = 0;
    real lambda_cw = 0, lambda_unit = 0;
    vec cw;
};

struct failure_row {
    std::string ticker;
    int horizon = 0;
    std::string message;
};

struct metrics_report {
    std::vector<std::string> tickers;
    std::vector<int> horizons;
    std::vector<metric_row> metrics;
    std::vector<step_row> steps;
    std::vector<er_row> er;
    std::vector<selection_row> selection;
    std::vector<cell_info> cells;
    std::vector<failure_row> failures;
    std::vector<std::string> warnings;
    std::string fingerprint;
    std::uint64_t seed = 0;

    [[nodiscard]] std::optional<real> nrmse(std::string_view ticker, int horizon, std::string_view model) const {
        for (const auto& m : metrics)
            if (m.ticker == ticker && m.horizon == horizon && m.model == model) return m.nrmse;
        return std::nullopt;
    }
    [[nodiscard]] std::optional<real> error_reduction_of(std::string_view ticker, int horizon) const {
        for (const auto& e : er)
            if (e.ticker == ticker && e.horizon == horizon) return e.er;
        return std::nullopt;
    }
};

struct experiment_outcome {
    metrics_report report;
    std::vector<prediction_result> predictions;
};

/// Appends the metric rows of one evaluated cell.
inline void record_cell(metrics_report& report, const trained_cell& cell, const prediction_result& p) {
    const std::string& t = p.ticker;
    const int h = p.horizon;
    real rc_cw = nrmse_multistep(p.y_true, p.rc_cw);
    real rc = nrmse_multistep(p.y_true, p.rc);
    report.metrics.push_back({t, h, "rc_cw", "reservoir", rc_cw});
    report.metrics.push_back({t, h, "rc", "reservoir", rc});
    auto add_steps = [&](const std::string& model, const mat& pred) {
        vec per = nrmse_per_step(p.y_true, pred);
        for (Eigen::Index j = 0; j < per.size(); ++j) report.steps.push_back({t, h, model, static_cast<int>(j + 1), per[j]});
    };
    add_steps("rc_cw", p.rc_cw);
    add_steps("rc", p.rc);
    if (cell.baseline) {
        real ml = nrmse_multistep(p.y_true, p.best_ml);
        report.metrics.push_back({t, h, "best_ml", p.best_ml_name, ml});
        add_steps("best_ml", p.best_ml);
        report.er.push_back({t, h, rc_cw, ml, p.best_ml_name, error_reduction(rc_cw, ml)});
        const auto& sel = *cell.baseline;
        for (const auto& c : sel.candidates) {
            bool chosen = c.family == sel.model.family() && describe(c.family, c.params) == sel.model.description();
            report.selection.push_back({t, h, std::string(to_string(c.family)), describe(c.family, c.params), c.cv_nrmse, chosen});
        }
        if (auto w = sel.model.warning()) report.warnings.push_back(t + " h=" + std::to_string(h) + ": " + *w);
    }
    report.cells.push_back({t, h, cell.alpha, cell.beta, cell.weighted->lambda.lambda, cell.unweighted->lambda.lambda,
                            cell.cw.weights});
}

/// Loads one ticker's frame: synthetic, or OHLC + macro + indicators.
inline feature_frame load_frame(const experiment_config& cfg, const ticker_source& src,
                                const std::vector<macro_series>& macros) {
    if (cfg.synthetic) return make_synthetic_frame(derive_seed(cfg.seed, src.ticker, 0, "synthetic"), cfg.synthetic_length);
    ohlc_series ohlc = load_ohlc_csv(src.ohlc_path.string(), src.ticker);
    return align_and_join(ohlc, macros, compute_indicators(ohlc));
}

/// Runs every (ticker, horizon) cell.  Cell failures are recorded, not thrown.
inline experiment_outcome run_cells(const experiment_config& cfg) {
    cfg.validate();
    experiment_outcome out;
    auto& rep = out.report;
    rep.seed = cfg.seed;
    rep.fingerprint = fingerprint(cfg);
    rep.horizons = cfg.horizons;
    for (const auto& t : cfg.tickers) rep.tickers.push_back(t.ticker);

    std::vector<macro_series> macros;
    if (!cfg.synthetic) {
        for (auto name : macro_names)
            macros.push_back(load_macro_csv(cfg.macro_paths.at(std::string(name)).string(), std::string(name)));
    }
    for (const auto& src : cfg.tickers) {
        std::optional<std::pair<feature_frame, feature_frame>> slices;
        try {
            slices = split(load_frame(cfg, src, macros), cfg.train_len, cfg.test_len);
        } catch (const std::exception& e) {
            for (int h : cfg.horizons) rep.failures.push_back({src.ticker, h, e.what()});
            continue;
        }
        for (int h : cfg.horizons) {
            try {
                trained_cell cell = fit_cell(slices->first, h, cfg, src.ticker);
                prediction_result p = evaluate_cell(cell, slices->first, slices->second, src.ticker);
                record_cell(rep, cell, p);
                out.predictions.push_back(std::move(p));
            } catch (const std::exception& e) {
                rep.failures.push_back({src.ticker, h, e.what()});
            }
        }
    }
    return out;
}

} // namespace oprc
