#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <complex>
#include <cstdio>
#include <cstdint>
#include <string>
#include <string_view>

#include "oprc/errors.hpp"

namespace oprc {

using real = double;
using vec = Eigen::VectorXd;
using mat = Eigen::MatrixXd;
/// Row-major storage for images so that block layout matches memory order.
using image = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using cimage = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using calendar_day = std::chrono::sys_days;

/// Parses a strict `YYYY-MM-DD` date.
inline calendar_day parse_iso_date(std::string_view text) {
    auto digits = [&](std::size_t from, std::size_t count) {
        int value = 0;
        for (std::size_t i = from; i < from + count; ++i) {
            char c = text[i];
            if (c < '0' || c > '9') throw parse_error("invalid date '" + std::string(text) + "'");
            value = value * 10 + (c - '0');
        }
        return value;
    };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw parse_error("invalid date '" + std::string(text) + "'");
    std::chrono::year_month_day ymd{std::chrono::year{digits(0, 4)},
                                    std::chrono::month{static_cast<unsigned>(digits(5, 2))},
                                    std::chrono::day{static_cast<unsigned>(digits(8, 2))}};
    if (!ymd.ok()) throw parse_error("invalid date '" + std::string(text) + "'");
    return calendar_day{ymd};
}

inline std::string format_iso_date(calendar_day day) {
    std::chrono::year_month_day ymd{day};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

/// splitmix64 finalizer; used to derive independent seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace oprc
