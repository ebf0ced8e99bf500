#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "oprc/baselines/supervised.hpp"

namespace oprc {

/// k-nearest-neighbour regression on standardized features.
struct knn_model {
    standardizer scaler;
    mat x; ///< standardized training rows
    mat y;
    int k = 1;

    [[nodiscard]] mat predict(const mat& query) const {
        const mat q = scaler.apply(query);
        mat out(q.rows(), y.cols());
        std::vector<std::pair<real, Eigen::Index>> dist(static_cast<std::size_t>(x.rows()));
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
            for (Eigen::Index r = 0; r < x.rows(); ++r)
                dist[static_cast<std::size_t>(r)] = {(x.row(r) - q.row(i)).squaredNorm(), r};
            // pair ordering breaks distance ties by lower row index
            std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
            Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(y.cols());
            for (int j = 0; j < k; ++j) acc += y.row(dist[static_cast<std::size_t>(j)].second);
            out.row(i) = acc / k;
        }
        return out;
    }
};

inline knn_model fit_knn(const mat& x, const mat& y, int k) {
    if (x.rows() != y.rows()) throw shape_error("fit_knn: row mismatch");
    if (k < 1 || k > x.rows())
        throw config_error("fit_knn: k=" + std::to_string(k) + " must be in [1, " + std::to_string(x.rows()) + "]");
    knn_model m;
    m.scaler = standardizer::fit(x);
    m.x = m.scaler.apply(x);
    m.y = y;
    m.k = k;
    return m;
}

} // namespace oprc
