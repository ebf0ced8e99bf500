#pragma once

// Market/macro CSV ingestion, feature alignment, chronological split and
// train-fitted min-max scaling.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oprc/types.hpp"

namespace oprc {

struct ohlc_bar {
    calendar_day date;
    real open = 0, high = 0, low = 0, close = 0;
    real volume = 0;
};

struct ohlc_series {
    std::string ticker;
    std::vector<ohlc_bar> bars;

    [[nodiscard]] std::size_t size() const noexcept { return bars.size(); }
    [[nodiscard]] vec closes() const {
        vec v(static_cast<Eigen::Index>(bars.size()));
        for (std::size_t i = 0; i < bars.size(); ++i) v[static_cast<Eigen::Index>(i)] = bars[i].close;
        return v;
    }
    [[nodiscard]] vec highs() const {
        vec v(static_cast<Eigen::Index>(bars.size()));
        for (std::size_t i = 0; i < bars.size(); ++i) v[static_cast<Eigen::Index>(i)] = bars[i].high;
        return v;
    }
    [[nodiscard]] vec lows() const {
        vec v(static_cast<Eigen::Index>(bars.size()));
        for (std::size_t i = 0; i < bars.size(); ++i) v[static_cast<Eigen::Index>(i)] = bars[i].low;
        return v;
    }
};

inline constexpr std::array<std::string_view, 4> macro_names{"VIX", "EFFR", "UMCSENT", "DXYNYB"};

struct macro_point {
    calendar_day date;
    real value = 0;
};

struct macro_series {
    std::string name;
    std::vector<macro_point> points;
};

/// Number of model input columns: Close(t-1) followed by the seven features.
inline constexpr int n_features = 8;
inline constexpr std::array<std::string_view, n_features> feature_columns{
    "Close(t-1)", "VIX", "EFFR", "UMCSENT", "DXYNYB", "MACD", "ATR", "RSI"};
inline constexpr std::string_view target_column = "Close";

/// Aligned per-day input matrix plus target.  Column order of `inputs`
/// follows `feature_columns`; the synthetic suite reuses the layout with its
/// own channel names.
struct feature_frame {
    std::vector<calendar_day> dates;
    mat inputs; // rows x input columns
    vec target; // close at t

    [[nodiscard]] Eigen::Index rows() const noexcept { return target.size(); }
    [[nodiscard]] Eigen::Index cols() const noexcept { return inputs.cols(); }

    [[nodiscard]] feature_frame slice(Eigen::Index begin, Eigen::Index count) const {
        feature_frame out;
        out.dates.assign(dates.begin() + begin, dates.begin() + begin + count);
        out.inputs = inputs.middleRows(begin, count);
        out.target = target.segment(begin, count);
        return out;
    }
};

/// Concatenates two chronologically adjacent frames.
inline feature_frame concat(const feature_frame& a, const feature_frame& b) {
    if (a.cols() != b.cols()) throw shape_error("concat: column mismatch");
    if (!a.dates.empty() && !b.dates.empty() && !(a.dates.back() < b.dates.front()))
        throw integrity_error("concat: frames are not chronological");
    feature_frame out;
    out.dates = a.dates;
    out.dates.insert(out.dates.end(), b.dates.begin(), b.dates.end());
    out.inputs.resize(a.rows() + b.rows(), a.cols());
    out.inputs << a.inputs, b.inputs;
    out.target.resize(a.rows() + b.rows());
    out.target << a.target, b.target;
    return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        auto b = f.find_first_not_of(" \t");
        auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
    }
    return fields;
}

inline real parse_real(const std::string& text, const std::string& where) {
    real value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty() || !std::isfinite(value))
        throw parse_error(where + ": non-numeric value '" + text + "'");
    return value;
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (!lines.empty() && lines.front().size() >= 3 &&
        lines.front().compare(0, 3, "\xEF\xBB\xBF") == 0)
        lines.front().erase(0, 3);
    return lines;
}

inline std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

} // namespace detail

/// Reads `date,open,high,low,close,volume`.  Rows must be strictly
/// increasing in date; duplicates and OHLC inconsistencies are integrity errors.
inline ohlc_series load_ohlc_csv(const std::string& path, std::string ticker = {}) {
    auto lines = detail::read_lines(path);
    if (lines.empty()) throw parse_error(path + ": empty file");
    auto header = detail::split_csv_line(lines.front());
    for (auto& h : header) h = detail::lowercase(h);
    if (header != std::vector<std::string>{"date", "open", "high", "low", "close", "volume"})
        throw parse_error(path + ":1: expected header date,open,high,low,close,volume");

    ohlc_series out;
    out.ticker = std::move(ticker);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::string where = path + ":" + std::to_string(i + 1);
        auto f = detail::split_csv_line(lines[i]);
        if (f.size() != 6) throw parse_error(where + ": expected 6 fields, got " + std::to_string(f.size()));
        ohlc_bar bar;
        try {
            bar.date = parse_iso_date(f[0]);
        } catch (const parse_error& e) {
            throw parse_error(where + ": " + e.what());
        }
        bar.open = detail::parse_real(f[1], where);
        bar.high = detail::parse_real(f[2], where);
        bar.low = detail::parse_real(f[3], where);
        bar.close = detail::parse_real(f[4], where);
        bar.volume = detail::parse_real(f[5], where);
        if (bar.open <= 0 || bar.high <= 0 || bar.low <= 0 || bar.close <= 0)
            throw integrity_error(where + ": prices must be positive");
        if (bar.volume < 0) throw integrity_error(where + ": negative volume");
        if (bar.high < std::max(bar.open, bar.close) || bar.low > std::min(bar.open, bar.close))
            throw integrity_error(where + ": high/low inconsistent with open/close");
        if (!out.bars.empty()) {
            if (bar.date == out.bars.back().date)
                throw integrity_error(where + ": duplicate date " + format_iso_date(bar.date));
            if (bar.date < out.bars.back().date)
                throw integrity_error(where + ": dates not increasing at " + format_iso_date(bar.date));
        }
        out.bars.push_back(bar);
    }
    return out;
}

/// Reads `date,value` for one of the macro channels (VIX, EFFR, UMCSENT, DXYNYB).
inline macro_series load_macro_csv(const std::string& path, const std::string& name) {
    if (std::find(macro_names.begin(), macro_names.end(), name) == macro_names.end())
        throw config_error("unknown macro series '" + name + "'");
    auto lines = detail::read_lines(path);
    if (lines.size() < 2) throw parse_error(path + ": empty file");
    auto header = detail::split_csv_line(lines.front());
    for (auto& h : header) h = detail::lowercase(h);
    if (header != std::vector<std::string>{"date", "value"})
        throw parse_error(path + ":1: expected header date,value");

    macro_series out{name, {}};
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::string where = path + ":" + std::to_string(i + 1);
        auto f = detail::split_csv_line(lines[i]);
        if (f.size() != 2) throw parse_error(where + ": expected 2 fields");
        macro_point p;
        try {
            p.date = parse_iso_date(f[0]);
        } catch (const parse_error& e) {
            throw parse_error(where + ": " + e.what());
        }
        p.value = detail::parse_real(f[1], where);
        if (!out.points.empty() && !(out.points.back().date < p.date))
            throw integrity_error(where + ": dates not strictly increasing at " + format_iso_date(p.date));
        out.points.push_back(p);
    }
    return out;
}

/// Technical indicator columns aligned to the OHLC bars; NaN marks warm-up.
struct indicator_columns {
    vec macd, atr, rsi;
};

/// Forward-fills `series` onto `days`.  Days before the first point get NaN.
inline vec forward_fill(const macro_series& series, const std::vector<calendar_day>& days) {
    vec out(static_cast<Eigen::Index>(days.size()));
    std::size_t j = 0;
    std::optional<real> last;
    for (std::size_t i = 0; i < days.size(); ++i) {
        while (j < series.points.size() && series.points[j].date <= days[i]) last = series.points[j++].value;
        out[static_cast<Eigen::Index>(i)] = last ? *last : std::numeric_limits<real>::quiet_NaN();
    }
    return out;
}

/// Joins closes, forward-filled macro series and indicators into a frame.
/// Rows with any undefined input (lag warm-up, indicator warm-up) are dropped.
inline feature_frame align_and_join(const ohlc_series& ohlc, const std::vector<macro_series>& macros,
                                    const indicator_columns& indicators) {
    const auto n = static_cast<Eigen::Index>(ohlc.size());
    if (indicators.macd.size() != n || indicators.atr.size() != n || indicators.rsi.size() != n)
        throw shape_error("align_and_join: indicator columns must match the OHLC length");

    std::vector<calendar_day> days;
    days.reserve(ohlc.size());
    for (const auto& b : ohlc.bars) days.push_back(b.date);

    mat all(n, n_features);
    all.col(0)(0) = std::numeric_limits<real>::quiet_NaN();
    for (Eigen::Index t = 1; t < n; ++t) all(t, 0) = ohlc.bars[static_cast<std::size_t>(t - 1)].close;
    for (std::size_t m = 0; m < macro_names.size(); ++m) {
        auto it = std::find_if(macros.begin(), macros.end(),
                               [&](const macro_series& s) { return s.name == macro_names[m]; });
        if (it == macros.end()) throw config_error("align_and_join: missing macro series " + std::string(macro_names[m]));
        all.col(static_cast<Eigen::Index>(1 + m)) = forward_fill(*it, days);
    }
    all.col(5) = indicators.macd;
    all.col(6) = indicators.atr;
    all.col(7) = indicators.rsi;

    // First usable row: every lag/indicator column defined.
    Eigen::Index first = 0;
    auto defined = [](real v) { return !std::isnan(v); };
    for (Eigen::Index t = 0; t < n; ++t) {
        bool ok = defined(all(t, 0)) && defined(all(t, 5)) && defined(all(t, 6)) && defined(all(t, 7));
        if (ok) {
            first = t;
            break;
        }
        first = t + 1;
    }
    if (first >= n) throw length_error("align_and_join: no rows survive indicator warm-up");
    for (std::size_t m = 0; m < macro_names.size(); ++m) {
        if (!defined(all(first, static_cast<Eigen::Index>(1 + m))))
            throw coverage_error("align_and_join: " + std::string(macro_names[m]) + " starts after " +
                                 format_iso_date(days[static_cast<std::size_t>(first)]));
    }

    feature_frame out;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index t = first; t < n; ++t) {
        if (all.row(t).array().isNaN().any()) continue;
        keep.push_back(t);
    }
    out.inputs.resize(static_cast<Eigen::Index>(keep.size()), n_features);
    out.target.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
        auto t = keep[r];
        out.inputs.row(static_cast<Eigen::Index>(r)) = all.row(t);
        out.target[static_cast<Eigen::Index>(r)] = ohlc.bars[static_cast<std::size_t>(t)].close;
        out.dates.push_back(days[static_cast<std::size_t>(t)]);
    }
    return out;
}

/// Splits off the most recent `train_len + test_len` rows: train first, then test.
inline std::pair<feature_frame, feature_frame> split(const feature_frame& frame, Eigen::Index train_len,
                                                     Eigen::Index test_len) {
    if (train_len < 1 || test_len < 1) throw config_error("split: lengths must be positive");
    if (frame.rows() < train_len + test_len)
        throw length_error("split: need " + std::to_string(train_len + test_len) + " rows, have " +
                           std::to_string(frame.rows()));
    Eigen::Index offset = frame.rows() - train_len - test_len;
    return {frame.slice(offset, train_len), frame.slice(offset + train_len, test_len)};
}

/// Per-column min-max scaler.  The last column is the target.
class normalizer {
public:
    normalizer() = default;
    normalizer(vec min, vec max) : min_(std::move(min)), max_(std::move(max)) {
        if (min_.size() != max_.size()) throw shape_error("normalizer: bound sizes differ");
        for (Eigen::Index j = 0; j < min_.size(); ++j)
            if (!(max_[j] > min_[j])) throw degenerate_error("normalizer: column " + std::to_string(j) + " has zero range");
    }

    [[nodiscard]] const vec& min() const noexcept { return min_; }
    [[nodiscard]] const vec& max() const noexcept { return max_; }
    [[nodiscard]] Eigen::Index input_cols() const noexcept { return min_.size() - 1; }

    /// Scales inputs and target; values outside the fitted range are not clipped.
    [[nodiscard]] feature_frame apply(const feature_frame& f) const {
        check(f);
        feature_frame out = f;
        const auto k = input_cols();
        for (Eigen::Index j = 0; j < k; ++j)
            out.inputs.col(j) = (f.inputs.col(j).array() - min_[j]) / (max_[j] - min_[j]);
        out.target = scale_target(f.target);
        return out;
    }

    [[nodiscard]] feature_frame invert(const feature_frame& f) const {
        check(f);
        feature_frame out = f;
        const auto k = input_cols();
        for (Eigen::Index j = 0; j < k; ++j)
            out.inputs.col(j) = f.inputs.col(j).array() * (max_[j] - min_[j]) + min_[j];
        out.target = unscale_target(f.target);
        return out;
    }

    [[nodiscard]] mat scale_target(const mat& y) const {
        const auto k = input_cols();
        return (y.array() - min_[k]) / (max_[k] - min_[k]);
    }
    [[nodiscard]] mat unscale_target(const mat& y) const {
        const auto k = input_cols();
        return y.array() * (max_[k] - min_[k]) + min_[k];
    }

private:
    void check(const feature_frame& f) const {
        if (f.cols() + 1 != min_.size()) throw shape_error("normalizer: column count mismatch");
    }
    vec min_, max_;
};

inline normalizer fit_normalizer(const feature_frame& train) {
    if (train.rows() < 1) throw length_error("fit_normalizer: empty frame");
    const auto k = train.cols();
    vec lo(k + 1), hi(k + 1);
    for (Eigen::Index j = 0; j < k; ++j) {
        lo[j] = train.inputs.col(j).minCoeff();
        hi[j] = train.inputs.col(j).maxCoeff();
    }
    lo[k] = train.target.minCoeff();
    hi[k] = train.target.maxCoeff();
    for (Eigen::Index j = 0; j <= k; ++j) {
        if (!(hi[j] > lo[j])) {
            std::string name = j == k ? std::string(target_column)
                                      : (k == n_features ? std::string(feature_columns[static_cast<std::size_t>(j)])
                                                         : "column " + std::to_string(j));
            throw degenerate_error("fit_normalizer: " + name + " is constant on the training slice");
        }
    }
    return normalizer(lo, hi);
}

} // namespace oprc
