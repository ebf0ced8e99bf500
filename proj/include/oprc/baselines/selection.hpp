#pragma once

// Hyperparameter grids, chronological expanding-window cross-validation and
// best-model selection over the baseline families.

#include <array>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "oprc/baselines/knn.hpp"
#include "oprc/baselines/linear.hpp"
#include "oprc/baselines/tree.hpp"
#include "oprc/readout.hpp"

namespace oprc {

/// Declaration order is the tie-break order (simpler first).
enum class model_family { ols, ridge, lasso, elasticnet, knn, decision_tree, random_forest };

inline constexpr std::array<std::string_view, 7> family_names{"ols",   "ridge",         "lasso",        "elasticnet",
                                                              "knn",   "decision_tree", "random_forest"};

inline std::string_view to_string(model_family f) { return family_names[static_cast<std::size_t>(f)]; }

inline model_family parse_family(std::string_view name) {
    for (std::size_t i = 0; i < family_names.size(); ++i)
        if (family_names[i] == name) return static_cast<model_family>(i);
    throw config_error("unknown model family '" + std::string(name) + "'");
}

inline bool is_linear(model_family f) { return f <= model_family::elasticnet; }

struct hyperparams {
    real lambda = 0;       ///< ridge penalty / L1 penalty for lasso and elasticnet
    real l2 = 0;           ///< elasticnet L2 penalty
    int k = 5;             ///< knn
    int max_depth = 0;     ///< trees; 0 = unlimited
    int min_leaf = 1;
    int n_trees = 50;
    real feature_frac = 1.0 / 3.0;
};

struct model_spec {
    model_family family;
    std::vector<hyperparams> grid;

    void validate() const {
        if (grid.empty()) throw config_error("model_spec " + std::string(to_string(family)) + ": empty grid");
        for (const auto& h : grid) {
            if (h.lambda < 0 || h.l2 < 0) throw config_error("model_spec: penalties must be >= 0");
            if (h.k < 1) throw config_error("model_spec: k must be >= 1");
            if (h.max_depth < 0 || h.min_leaf < 1 || h.n_trees < 1) throw config_error("model_spec: invalid tree settings");
            if (!(h.feature_frac > 0 && h.feature_frac <= 1)) throw config_error("model_spec: feature_frac out of (0, 1]");
        }
    }
};

inline std::string describe(model_family f, const hyperparams& h) {
    std::ostringstream os;
    os.precision(6);
    switch (f) {
    case model_family::ols: os << "-"; break;
    case model_family::ridge:
    case model_family::lasso: os << "lambda=" << h.lambda; break;
    case model_family::elasticnet: os << "l1=" << h.lambda << ";l2=" << h.l2; break;
    case model_family::knn: os << "k=" << h.k; break;
    case model_family::decision_tree: os << "max_depth=" << h.max_depth << ";min_leaf=" << h.min_leaf; break;
    case model_family::random_forest:
        os << "n_trees=" << h.n_trees << ";max_depth=" << h.max_depth << ";min_leaf=" << h.min_leaf
           << ";feature_frac=" << h.feature_frac;
        break;
    }
    return os.str();
}

/// An immutable trained baseline.
class fitted_model {
public:
    fitted_model(model_family family, hyperparams params, std::variant<linear_model, knn_model, tree_ensemble> impl)
        : family_(family), params_(params), impl_(std::move(impl)) {}

    [[nodiscard]] model_family family() const noexcept { return family_; }
    [[nodiscard]] const hyperparams& params() const noexcept { return params_; }
    [[nodiscard]] std::string name() const { return std::string(to_string(family_)); }
    [[nodiscard]] std::string description() const { return describe(family_, params_); }

    [[nodiscard]] mat predict(const mat& x) const {
        return std::visit([&](const auto& m) { return m.predict(x); }, impl_);
    }

    /// Coordinate-descent convergence, when applicable.
    [[nodiscard]] std::optional<std::string> warning() const {
        if (auto* lm = std::get_if<linear_model>(&impl_); lm && !lm->converged)
            return name() + " did not converge (final delta " + std::to_string(lm->final_delta) + ")";
        return std::nullopt;
    }

private:
    model_family family_;
    hyperparams params_;
    std::variant<linear_model, knn_model, tree_ensemble> impl_;
};

inline fitted_model fit_model(model_family family, const hyperparams& h, const mat& x, const mat& y,
                              std::uint64_t seed = 1) {
    switch (family) {
    case model_family::ols: return {family, h, fit_ols(x, y)};
    case model_family::ridge: return {family, h, fit_ridge(x, y, h.lambda)};
    case model_family::lasso: return {family, h, fit_lasso(x, y, h.lambda)};
    case model_family::elasticnet: return {family, h, fit_elasticnet(x, y, h.lambda, h.l2)};
    case model_family::knn: return {family, h, fit_knn(x, y, h.k)};
    case model_family::decision_tree: return {family, h, fit_tree(x, y, h.max_depth, h.min_leaf)};
    case model_family::random_forest:
        return {family, h, fit_forest(x, y, {h.n_trees, h.max_depth, h.min_leaf, h.feature_frac, seed})};
    }
    throw config_error("fit_model: unknown family");
}

struct cv_fold {
    Eigen::Index train_end = 0; ///< train rows [0, train_end)
    Eigen::Index val_begin = 0; ///< validation rows [val_begin, val_end)
    Eigen::Index val_end = 0;
};

/// Expanding-window folds over `rows` chronological rows: the data is cut into
/// folds+1 blocks and fold i trains on blocks 0..i and validates on block i+1.
/// The first `gap` validation rows are purged so that no training target
/// overlaps a validation target.
inline std::vector<cv_fold> expanding_window_folds(Eigen::Index rows, int folds, Eigen::Index gap = 0) {
    if (folds < 2) throw config_error("cross-validation needs at least 2 folds");
    const Eigen::Index block = rows / (folds + 1);
    if (block < gap + 2) throw length_error("cross-validation: " + std::to_string(rows) + " rows is too few for " +
                                            std::to_string(folds) + " folds");
    std::vector<cv_fold> out;
    for (int i = 1; i <= folds; ++i) {
        cv_fold f;
        f.train_end = i * block;
        f.val_begin = f.train_end + gap;
        f.val_end = i == folds ? rows : (i + 1) * block;
        out.push_back(f);
    }
    return out;
}

struct candidate_score {
    model_family family;
    hyperparams params;
    real cv_nrmse; ///< +inf when the candidate could not be fitted
};

struct selection_result {
    fitted_model model;
    real cv_nrmse;
    std::vector<candidate_score> candidates;
};

/// Grid-searches every spec with expanding-window CV on pooled validation
/// NRMSE and refits the winner on all rows.  Ties go to the earlier family,
/// then the earlier grid point.
inline selection_result select_best_model(const std::vector<model_spec>& specs, const supervised_set& train,
                                          int folds, std::uint64_t seed = 1) {
    if (specs.empty()) throw config_error("select_best_model: no model specs");
    for (const auto& s : specs) s.validate();
    const auto fold_list = expanding_window_folds(train.rows(), folds, train.y.cols() - 1);

    std::vector<candidate_score> scores;
    for (const auto& spec : specs) {
        for (const auto& h : spec.grid) {
            real total = 0;
            bool ok = true;
            for (const auto& f : fold_list) {
                try {
                    auto m = fit_model(spec.family, h, train.x.topRows(f.train_end), train.y.topRows(f.train_end), seed);
                    const auto n_val = f.val_end - f.val_begin;
                    mat pred = m.predict(train.x.middleRows(f.val_begin, n_val));
                    total += nrmse_multistep(train.y.middleRows(f.val_begin, n_val), pred);
                } catch (const error&) {
                    ok = false;
                    break;
                }
            }
            scores.push_back({spec.family, h, ok ? total / static_cast<real>(fold_list.size())
                                                 : std::numeric_limits<real>::infinity()});
        }
    }

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i].cv_nrmse)) continue;
        if (!best) {
            best = i;
            continue;
        }
        const auto& b = scores[*best];
        const auto& c = scores[i];
        if (c.cv_nrmse < b.cv_nrmse || (c.cv_nrmse == b.cv_nrmse && c.family < b.family)) best = i;
    }
    if (!best) throw singular_error("select_best_model: every candidate failed to fit");
    const auto& w = scores[*best];
    return {fit_model(w.family, w.params, train.x, train.y, seed), w.cv_nrmse, std::move(scores)};
}

inline std::vector<real> log_grid(real from, real to) {
    std::vector<real> g;
    for (real v = from; v <= to * (1 + 1e-9); v *= 10) g.push_back(v);
    return g;
}

/// Default grids for the seven families.
inline std::vector<model_spec> default_model_specs() {
    std::vector<model_spec> specs;
    specs.push_back({model_family::ols, {hyperparams{}}});
    model_spec ridge{model_family::ridge, {}}, lasso{model_family::lasso, {}}, enet{model_family::elasticnet, {}};
    for (real l : log_grid(1e-4, 1e1)) {
        hyperparams h;
        h.lambda = l;
        ridge.grid.push_back(h);
        lasso.grid.push_back(h);
    }
    for (real l1 : log_grid(1e-4, 1e-1))
        for (real l2 : log_grid(1e-4, 1e-1)) {
            hyperparams h;
            h.lambda = l1;
            h.l2 = l2;
            enet.grid.push_back(h);
        }
    specs.push_back(ridge);
    specs.push_back(lasso);
    specs.push_back(enet);
    model_spec knn{model_family::knn, {}};
    for (int k : {1, 2, 5, 10, 20}) {
        hyperparams h;
        h.k = k;
        knn.grid.push_back(h);
    }
    specs.push_back(knn);
    model_spec tree{model_family::decision_tree, {}};
    for (int d : {2, 4, 8, 0}) {
        hyperparams h;
        h.max_depth = d;
        tree.grid.push_back(h);
    }
    specs.push_back(tree);
    model_spec forest{model_family::random_forest, {}};
    for (int d : {4, 8}) {
        hyperparams h;
        h.max_depth = d;
        h.n_trees = 50;
        forest.grid.push_back(h);
    }
    specs.push_back(forest);
    return specs;
}

} // namespace oprc
