#pragma once

#include <string>
#include <vector>

#include "oprc/ingest.hpp"

namespace oprc {

/// Stacked h-step design.  Row for anchor t = inputs[t-h+1..t] (timestep-major,
/// then feature); targets = target[t+1..t+h].
struct supervised_set {
    mat x;
    mat y;
    std::vector<calendar_day> anchors;
    std::vector<Eigen::Index> anchor_rows; ///< anchor row index in the source frame

    [[nodiscard]] Eigen::Index rows() const noexcept { return x.rows(); }

    [[nodiscard]] supervised_set subset(Eigen::Index begin, Eigen::Index count) const {
        supervised_set out;
        out.x = x.middleRows(begin, count);
        out.y = y.middleRows(begin, count);
        out.anchors.assign(anchors.begin() + begin, anchors.begin() + begin + count);
        out.anchor_rows.assign(anchor_rows.begin() + begin, anchor_rows.begin() + begin + count);
        return out;
    }
};

/// The stacked input vector u(t) for anchor row t (needs t >= h-1).
inline vec stacked_inputs(const feature_frame& frame, Eigen::Index t, int horizon) {
    const auto k = frame.cols();
    vec u(k * horizon);
    for (int s = 0; s < horizon; ++s) u.segment(s * k, k) = frame.inputs.row(t - horizon + 1 + s).transpose();
    return u;
}

inline supervised_set build_supervised(const feature_frame& frame, int horizon) {
    if (horizon < 1) throw config_error("build_supervised: horizon must be >= 1");
    if (frame.rows() < 2 * horizon)
        throw length_error("build_supervised: frame of " + std::to_string(frame.rows()) + " rows is too short for horizon " +
                           std::to_string(horizon));
    const auto k = frame.cols();
    const Eigen::Index first = horizon - 1;
    const Eigen::Index last = frame.rows() - 1 - horizon;
    const Eigen::Index n = last - first + 1;
    supervised_set out;
    out.x.resize(n, k * horizon);
    out.y.resize(n, horizon);
    for (Eigen::Index t = first; t <= last; ++t) {
        const auto r = t - first;
        out.x.row(r) = stacked_inputs(frame, t, horizon).transpose();
        out.y.row(r) = frame.target.segment(t + 1, horizon).transpose();
        out.anchors.push_back(frame.dates[static_cast<std::size_t>(t)]);
        out.anchor_rows.push_back(t);
    }
    return out;
}

/// Column-wise z-scoring fitted on training rows; constant columns keep scale 1.
struct standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;

    static standardizer fit(const mat& x) {
        standardizer s;
        s.mean = x.colwise().mean();
        s.scale.resize(x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            real sd = std::sqrt((x.col(j).array() - s.mean[j]).square().mean());
            s.scale[j] = sd > 0 ? sd : 1.0;
        }
        return s;
    }

    [[nodiscard]] mat apply(const mat& x) const {
        if (x.cols() != mean.size()) throw shape_error("standardizer: column mismatch");
        return (x.rowwise() - mean).array().rowwise() / scale.array();
    }
};

} // namespace oprc
