#pragma once

// Synthetic stand-in for a market index: a second-order NARMA recurrence
// driven by a slowly varying input, with seven auxiliary channels laid out
// like the market feature columns.
//
//   s(t)   = clip(0.25 + 0.7 (s(t-1) - 0.25) + U(-0.12, 0.12), 0, 0.5)
//   y(t+1) = 0.4 y(t) + 0.4 y(t) y(t-1) + 0.6 s(t)^3 + 0.1
//   close  = 100 (1 + 2 y)
//
// Channels, in column order:
//   0  close(t-1)
//   1  drive s(t)
//   2  close(t) + N(0, 1)                 (noisy same-day reading)
//   3  mean(close(t-2..t))                (short trailing average)
//   4-7  i.i.d. U(0, 1) noise, independent of everything else

#include <array>
#include <cstdint>
#include <random>
#include <string_view>

#include "oprc/ingest.hpp"

namespace oprc {

inline constexpr std::array<std::string_view, n_features> synthetic_columns{
    "Close(t-1)", "drive", "close_noisy", "close_ma3", "noise1", "noise2", "noise3", "noise4"};

inline feature_frame make_synthetic_frame(std::uint64_t seed, Eigen::Index length = 600, Eigen::Index burn_in = 100) {
    if (length < 2) throw config_error("synthetic: length must be >= 2");
    std::mt19937_64 rng(seed);
    auto uniform = [&](real lo, real hi) { return lo + (hi - lo) * (static_cast<real>(rng() >> 11) * 0x1.0p-53); };
    std::normal_distribution<real> gauss(0.0, 1.0);

    const Eigen::Index total = length + burn_in + 2;
    vec s = vec::Zero(total), y = vec::Zero(total);
    for (Eigen::Index t = 1; t < total; ++t)
        s[t] = std::clamp(0.25 + 0.7 * (s[t - 1] - 0.25) + uniform(-0.12, 0.12), 0.0, 0.5);
    for (Eigen::Index t = 1; t + 1 < total; ++t)
        y[t + 1] = 0.4 * y[t] + 0.4 * y[t] * y[t - 1] + 0.6 * s[t] * s[t] * s[t] + 0.1;
    vec close = (100.0 * (1.0 + 2.0 * y.array())).matrix();

    mat channels(total, n_features);
    for (Eigen::Index t = 0; t < total; ++t) {
        channels(t, 0) = t > 0 ? close[t - 1] : close[0];
        channels(t, 1) = s[t];
        channels(t, 2) = close[t] + gauss(rng);
        Eigen::Index from = std::max<Eigen::Index>(0, t - 2);
        channels(t, 3) = close.segment(from, t - from + 1).mean();
        for (int j = 4; j < n_features; ++j) channels(t, j) = uniform(0.0, 1.0);
    }

    feature_frame f;
    const Eigen::Index first = burn_in + 2;
    f.inputs = channels.middleRows(first, length);
    f.target = close.segment(first, length);
    // Weekday calendar starting Monday 2023-01-02.
    calendar_day day = parse_iso_date("2023-01-02");
    for (Eigen::Index i = 0; i < length; ++i) {
        while (std::chrono::weekday{day}.iso_encoding() > 5) day += std::chrono::days{1};
        f.dates.push_back(day);
        day += std::chrono::days{1};
    }
    return f;
}

} // namespace oprc
