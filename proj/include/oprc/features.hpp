#pragma once

// Technical indicators and the correlation weight vector.  Indicator outputs
// are aligned with their input; warm-up entries are NaN.

#include <cmath>
#include <limits>
#include <string>

#include "oprc/ingest.hpp"

namespace oprc {

namespace detail {
inline constexpr real nan = std::numeric_limits<real>::quiet_NaN();
}

/// Exponential moving average seeded with the mean of the first `period`
/// values, smoothing factor 2/(period+1).
inline vec ema(const vec& series, int period) {
    if (period < 1) throw config_error("ema: period must be >= 1");
    if (series.size() < period)
        throw length_error("ema: period " + std::to_string(period) + " exceeds series length " +
                           std::to_string(series.size()));
    vec out = vec::Constant(series.size(), detail::nan);
    const real k = 2.0 / (period + 1.0);
    real e = series.head(period).mean();
    out[period - 1] = e;
    for (Eigen::Index t = period; t < series.size(); ++t) {
        e = k * series[t] + (1.0 - k) * e;
        out[t] = e;
    }
    return out;
}

/// EMA(fast) - EMA(slow).  The first `slow` rows are warm-up: the slow EMA's
/// seed row is still a plain mean and is not reported.
inline vec macd(const vec& close, int fast = 12, int slow = 26) {
    if (close.size() < slow)
        throw length_error("macd: need at least " + std::to_string(slow) + " values, have " +
                           std::to_string(close.size()));
    vec out = ema(close, fast) - ema(close, slow);
    out.head(slow).setConstant(detail::nan);
    return out;
}

/// Wilder-smoothed average true range.  Defined from index `period`.
inline vec atr(const vec& high, const vec& low, const vec& close, int period = 14) {
    if (high.size() != low.size() || high.size() != close.size()) throw shape_error("atr: mismatched lengths");
    if (period < 1) throw config_error("atr: period must be >= 1");
    if (close.size() < period + 1)
        throw length_error("atr: need at least " + std::to_string(period + 1) + " values");
    const auto n = close.size();
    vec tr(n);
    tr[0] = detail::nan;
    for (Eigen::Index t = 1; t < n; ++t) {
        tr[t] = std::max({high[t] - low[t], std::abs(high[t] - close[t - 1]), std::abs(low[t] - close[t - 1])});
    }
    vec out = vec::Constant(n, detail::nan);
    real a = tr.segment(1, period).mean();
    out[period] = a;
    for (Eigen::Index t = period + 1; t < n; ++t) {
        a = (a * (period - 1) + tr[t]) / period;
        out[t] = a;
    }
    return out;
}

/// Wilder RSI in [0, 100]; 100 when there are no losses, 50 when flat.
inline vec rsi(const vec& close, int period = 14) {
    if (period < 1) throw config_error("rsi: period must be >= 1");
    if (close.size() < period + 1)
        throw length_error("rsi: need at least " + std::to_string(period + 1) + " values");
    const auto n = close.size();
    auto value = [](real gain, real loss) {
        if (loss == 0.0) return gain > 0.0 ? 100.0 : 50.0;
        return 100.0 - 100.0 / (1.0 + gain / loss);
    };
    real gain = 0, loss = 0;
    for (Eigen::Index t = 1; t <= period; ++t) {
        real d = close[t] - close[t - 1];
        gain += std::max(d, 0.0);
        loss += std::max(-d, 0.0);
    }
    gain /= period;
    loss /= period;
    vec out = vec::Constant(n, detail::nan);
    out[period] = value(gain, loss);
    for (Eigen::Index t = period + 1; t < n; ++t) {
        real d = close[t] - close[t - 1];
        gain = (gain * (period - 1) + std::max(d, 0.0)) / period;
        loss = (loss * (period - 1) + std::max(-d, 0.0)) / period;
        out[t] = value(gain, loss);
    }
    return out;
}

/// MACD(12,26), ATR(14), RSI(14) on the bars of one index.
inline indicator_columns compute_indicators(const ohlc_series& ohlc) {
    vec c = ohlc.closes();
    return {macd(c), atr(ohlc.highs(), ohlc.lows(), c), rsi(c)};
}

/// Population Pearson correlation.
inline real pearson(const vec& a, const vec& b) {
    if (a.size() != b.size()) throw shape_error("pearson: mismatched lengths");
    if (a.size() < 2) throw length_error("pearson: need at least 2 values");
    const real n = static_cast<real>(a.size());
    vec da = a.array() - a.mean();
    vec db = b.array() - b.mean();
    real va = da.squaredNorm() / n, vb = db.squaredNorm() / n;
    if (va == 0.0 || vb == 0.0) throw degenerate_error("pearson: correlation undefined for a constant input");
    real r = da.dot(db) / n / std::sqrt(va * vb);
    return std::clamp(r, -1.0, 1.0);
}

/// Pearson matrix over the input columns followed by the target (last row/column).
inline mat correlation_matrix(const feature_frame& frame) {
    if (frame.rows() < 2) throw length_error("correlation_matrix: need at least 2 rows");
    const auto k = frame.cols();
    mat data(frame.rows(), k + 1);
    data << frame.inputs, frame.target;
    for (Eigen::Index j = 0; j <= k; ++j) {
        if (data.col(j).maxCoeff() == data.col(j).minCoeff()) {
            std::string name = j == k ? std::string(target_column)
                                      : (k == n_features ? std::string(feature_columns[static_cast<std::size_t>(j)])
                                                         : "column " + std::to_string(j));
            throw degenerate_error("correlation_matrix: column " + name + " is constant");
        }
    }
    mat out(k + 1, k + 1);
    for (Eigen::Index i = 0; i <= k; ++i) {
        out(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j <= k; ++j) out(i, j) = out(j, i) = pearson(data.col(i), data.col(j));
    }
    return out;
}

/// W_cor: correlation of each input column with the target (bottom row of the
/// correlation matrix, target entry excluded).
struct correlation_weights {
    vec weights;

    /// All-ones weights; weighted and unweighted reservoirs coincide.
    static correlation_weights unit(Eigen::Index n) { return {vec::Ones(n)}; }
};

/// Computed on the training slice.  With `signed_weights` the raw Pearson
/// coefficient is kept instead of its magnitude.
inline correlation_weights compute_correlation_weights(const feature_frame& train, bool signed_weights = false) {
    mat c = correlation_matrix(train);
    const auto k = train.cols();
    vec w = c.row(k).head(k).transpose();
    if (!signed_weights) w = w.cwiseAbs();
    return {w};
}

} // namespace oprc
