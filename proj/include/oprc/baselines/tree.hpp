#pragma once

// CART regression trees and bagged random forests.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "oprc/types.hpp"

namespace oprc {

struct tree_params {
    int max_depth = 0;     ///< 0 = unlimited
    int min_leaf = 1;
    real feature_frac = 1; ///< fraction of features tried at each split

    void validate() const {
        if (max_depth < 0) throw config_error("tree: max_depth must be >= 1 (or 0 for unlimited)");
        if (min_leaf < 1) throw config_error("tree: min_leaf must be >= 1");
        if (!(feature_frac > 0 && feature_frac <= 1)) throw config_error("tree: feature_frac must be in (0, 1]");
    }
};

class regression_tree {
public:
    struct node {
        int feature = -1; ///< -1 for leaves
        real threshold = 0;
        int left = -1, right = -1;
        real value = 0;
    };

    regression_tree() = default;

    /// Fits on `rows` of (x, y); rows may repeat (bootstrap samples).
    regression_tree(const mat& x, const vec& y, const std::vector<Eigen::Index>& rows, tree_params params,
                    std::mt19937_64* rng = nullptr)
        : params_(params) {
        params_.validate();
        if (x.rows() != y.size()) throw shape_error("tree: row mismatch");
        if (rows.empty()) throw shape_error("tree: no training rows");
        std::vector<Eigen::Index> idx = rows;
        build(x, y, idx, 0, rng);
    }

    regression_tree(const mat& x, const vec& y, tree_params params) : regression_tree(x, y, all_rows(x.rows()), params) {}

    [[nodiscard]] real predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
        int i = 0;
        while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
            const node& nd = nodes_[static_cast<std::size_t>(i)];
            i = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
        }
        return nodes_[static_cast<std::size_t>(i)].value;
    }

    [[nodiscard]] vec predict(const mat& x) const {
        vec out(x.rows());
        for (Eigen::Index r = 0; r < x.rows(); ++r) out[r] = predict_row(x.row(r));
        return out;
    }

    [[nodiscard]] const std::vector<node>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::size_t leaf_count() const {
        return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const node& n) { return n.feature < 0; }));
    }

    static std::vector<Eigen::Index> all_rows(Eigen::Index n) {
        std::vector<Eigen::Index> r(static_cast<std::size_t>(n));
        std::iota(r.begin(), r.end(), Eigen::Index{0});
        return r;
    }

private:
    int build(const mat& x, const vec& y, std::vector<Eigen::Index>& idx, int depth, std::mt19937_64* rng) {
        const int self = static_cast<int>(nodes_.size());
        nodes_.push_back({});
        const auto n = idx.size();
        real sum = 0, lo = y[idx[0]], hi = y[idx[0]];
        for (auto r : idx) {
            sum += y[r];
            lo = std::min(lo, y[r]);
            hi = std::max(hi, y[r]);
        }
        nodes_[static_cast<std::size_t>(self)].value = sum / static_cast<real>(n);

        const bool pure = lo == hi;
        const bool depth_done = params_.max_depth > 0 && depth >= params_.max_depth;
        if (pure || depth_done || n < 2 * static_cast<std::size_t>(params_.min_leaf)) return self;

        const auto p = static_cast<int>(x.cols());
        std::vector<int> features(static_cast<std::size_t>(p));
        std::iota(features.begin(), features.end(), 0);
        int tried = p;
        if (params_.feature_frac < 1) {
            tried = std::max(1, static_cast<int>(std::lround(params_.feature_frac * p)));
            if (!rng) throw config_error("tree: feature subsampling needs a random generator");
            for (int i = 0; i < tried; ++i) {
                std::uniform_int_distribution<int> pick(i, p - 1);
                std::swap(features[static_cast<std::size_t>(i)], features[static_cast<std::size_t>(pick(*rng))]);
            }
            std::sort(features.begin(), features.begin() + tried);
        }

        int best_feature = -1;
        real best_threshold = 0, best_sse = std::numeric_limits<real>::infinity();
        std::vector<Eigen::Index> order(idx);
        const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
        for (int fi = 0; fi < tried; ++fi) {
            const int f = features[static_cast<std::size_t>(fi)];
            std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
                return x(a, f) < x(b, f) || (x(a, f) == x(b, f) && a < b);
            });
            real total = 0, total_sq = 0;
            for (auto r : order) {
                total += y[r];
                total_sq += y[r] * y[r];
            }
            real left = 0, left_sq = 0;
            for (std::size_t i = 1; i < n; ++i) {
                const real yv = y[order[i - 1]];
                left += yv;
                left_sq += yv * yv;
                if (i < min_leaf || n - i < min_leaf) continue;
                const real xa = x(order[i - 1], f), xb = x(order[i], f);
                if (!(xa < xb)) continue;
                const real nl = static_cast<real>(i), nr = static_cast<real>(n - i);
                const real right = total - left, right_sq = total_sq - left_sq;
                const real sse = (left_sq - left * left / nl) + (right_sq - right * right / nr);
                if (sse < best_sse) {
                    best_sse = sse;
                    best_feature = f;
                    real mid = 0.5 * (xa + xb);
                    best_threshold = (mid < xb) ? mid : xa;
                }
            }
        }
        if (best_feature < 0) return self;

        std::vector<Eigen::Index> left_rows, right_rows;
        for (auto r : idx) (x(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
        idx.clear();
        idx.shrink_to_fit();
        nodes_[static_cast<std::size_t>(self)].feature = best_feature;
        nodes_[static_cast<std::size_t>(self)].threshold = best_threshold;
        int l = build(x, y, left_rows, depth + 1, rng);
        nodes_[static_cast<std::size_t>(self)].left = l;
        int r = build(x, y, right_rows, depth + 1, rng);
        nodes_[static_cast<std::size_t>(self)].right = r;
        return self;
    }

    tree_params params_;
    std::vector<node> nodes_;
};

/// One tree ensemble per output column.  A single unbagged tree is the
/// decision-tree family; bootstrap + feature subsampling is the forest.
struct tree_ensemble {
    std::vector<std::vector<regression_tree>> per_output;

    [[nodiscard]] mat predict(const mat& x) const {
        mat out(x.rows(), static_cast<Eigen::Index>(per_output.size()));
        for (std::size_t o = 0; o < per_output.size(); ++o) {
            vec acc = vec::Zero(x.rows());
            for (const auto& t : per_output[o]) acc += t.predict(x);
            out.col(static_cast<Eigen::Index>(o)) = acc / static_cast<real>(per_output[o].size());
        }
        return out;
    }
};

inline tree_ensemble fit_tree(const mat& x, const mat& y, int max_depth, int min_leaf) {
    if (x.rows() != y.rows()) throw shape_error("fit_tree: row mismatch");
    tree_params p{max_depth, min_leaf, 1.0};
    tree_ensemble e;
    for (Eigen::Index o = 0; o < y.cols(); ++o) e.per_output.push_back({regression_tree(x, y.col(o), p)});
    return e;
}

struct forest_params {
    int n_trees = 50;
    int max_depth = 0;
    int min_leaf = 1;
    real feature_frac = 1.0 / 3.0;
    std::uint64_t seed = 1;
};

inline tree_ensemble fit_forest(const mat& x, const mat& y, const forest_params& fp) {
    if (x.rows() != y.rows()) throw shape_error("fit_forest: row mismatch");
    if (fp.n_trees < 1) throw config_error("fit_forest: n_trees must be >= 1");
    tree_params p{fp.max_depth, fp.min_leaf, fp.feature_frac};
    tree_ensemble e;
    const auto n = x.rows();
    for (Eigen::Index o = 0; o < y.cols(); ++o) {
        std::mt19937_64 rng(mix_seed(fp.seed ^ mix_seed(static_cast<std::uint64_t>(o))));
        std::uniform_int_distribution<Eigen::Index> draw(0, n - 1);
        std::vector<regression_tree> trees;
        trees.reserve(static_cast<std::size_t>(fp.n_trees));
        vec yo = y.col(o);
        for (int t = 0; t < fp.n_trees; ++t) {
            std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
            for (auto& r : rows) r = draw(rng);
            trees.emplace_back(x, yo, rows, p, &rng);
        }
        e.per_output.push_back(std::move(trees));
    }
    return e;
}

} // namespace oprc
