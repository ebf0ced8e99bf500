#pragma once

// Numerical model of the SLM -> lens -> camera chain.  The SLM carries a
// phase-only pattern, the lens maps it to its Fourier plane, and the camera
// records saturated, quantized intensity.

#include <fftw3.h>

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <span>
#include <string>

#include "oprc/types.hpp"

namespace oprc {

struct slm_geometry {
    int grid = 400;  ///< pixels per side
    int block = 20;  ///< pixels per input block side

    [[nodiscard]] int blocks_per_side() const noexcept { return grid / block; }
    [[nodiscard]] int block_count() const noexcept { return blocks_per_side() * blocks_per_side(); }

    void validate() const {
        if (grid < 1 || block < 1) throw config_error("slm_geometry: grid and block must be positive");
        if (grid % block != 0)
            throw config_error("slm_geometry: grid " + std::to_string(grid) + " not divisible by block " +
                               std::to_string(block));
    }
};

struct phase_frame {
    image phase; ///< radians in [0, 2pi)
};

struct camera_image {
    image intensity; ///< quantized values k/(2^bits - 1)
    int bits = 8;
};

/// Upper end of the phase range; strictly below 2pi.
inline constexpr real max_phase = 6.283185307179585; // nextafter(2pi, 0)
static_assert(max_phase < 2 * std::numbers::pi);

/// Repeats `values` over the block grid in row-major block order, cycling
/// until every block is filled.
inline image tile_inputs(std::span<const real> values, const slm_geometry& geom) {
    geom.validate();
    const auto n = static_cast<int>(values.size());
    if (n < 1) throw capacity_error("tile_inputs: no input values");
    if (n > geom.block_count())
        throw capacity_error("tile_inputs: " + std::to_string(n) + " values exceed " +
                             std::to_string(geom.block_count()) + " blocks");
    const int per_side = geom.blocks_per_side();
    image out(geom.grid, geom.grid);
    for (int br = 0; br < per_side; ++br) {
        for (int bc = 0; bc < per_side; ++bc) {
            real v = values[static_cast<std::size_t>((br * per_side + bc) % n)];
            out.block(br * geom.block, bc * geom.block, geom.block, geom.block).setConstant(v);
        }
    }
    return out;
}

inline image tile_inputs(const vec& values, const slm_geometry& geom) {
    return tile_inputs(std::span<const real>(values.data(), static_cast<std::size_t>(values.size())), geom);
}

struct phase_bounds {
    real lo = 0;
    real hi = 1;
};

/// alpha * prev + beta * (weights .* input), mapped affinely from the fixed
/// bounds onto [0, 2pi) with clamping at both ends.
inline phase_frame compose_phase(const camera_image& prev, const image& tiled_input, const image& in_weights,
                                 real alpha, real beta, phase_bounds bounds) {
    if (prev.intensity.rows() != tiled_input.rows() || prev.intensity.cols() != tiled_input.cols() ||
        in_weights.rows() != tiled_input.rows() || in_weights.cols() != tiled_input.cols())
        throw shape_error("compose_phase: geometry mismatch");
    if (!(bounds.hi > bounds.lo)) throw config_error("compose_phase: hi must exceed lo");
    if (!std::isfinite(alpha) || !std::isfinite(beta)) throw numeric_error("compose_phase: non-finite gain");
    const real scale = 1.0 / (bounds.hi - bounds.lo);
    phase_frame out;
    out.phase.resize(tiled_input.rows(), tiled_input.cols());
    const auto count = tiled_input.size();
    const real* x = prev.intensity.data();
    const real* u = tiled_input.data();
    const real* w = in_weights.data();
    real* p = out.phase.data();
    for (Eigen::Index i = 0; i < count; ++i) {
        real c = alpha * x[i] + beta * (w[i] * u[i]);
        if (!std::isfinite(c)) throw numeric_error("compose_phase: non-finite entry at pixel " + std::to_string(i));
        p[i] = max_phase * std::clamp((c - bounds.lo) * scale, 0.0, 1.0);
    }
    return out;
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace detail

/// In-place 2-D FFT plan for one grid size.  Holds its own aligned buffer.
class fourier_lens {
public:
    explicit fourier_lens(int grid) : grid_(grid) {
        if (grid < 1) throw config_error("fourier_lens: grid must be positive");
        const auto n = static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid);
        buffer_.reset(fftw_alloc_complex(n));
        if (!buffer_) throw std::bad_alloc();
        std::lock_guard lock(detail::fftw_planner_mutex());
        // FFTW_ESTIMATE keeps plan selection, and therefore results, reproducible.
        plan_.reset(fftw_plan_dft_2d(grid, grid, buffer_.get(), buffer_.get(), FFTW_FORWARD, FFTW_ESTIMATE));
        if (!plan_) throw numeric_error("fourier_lens: FFTW planning failed");
    }

    [[nodiscard]] int grid() const noexcept { return grid_; }

    /// Centered unitary DFT of exp(i * phase).
    [[nodiscard]] cimage propagate(const phase_frame& frame) {
        if (frame.phase.rows() != grid_ || frame.phase.cols() != grid_)
            throw shape_error("propagate: frame does not match lens grid");
        const Eigen::Index n = grid_;
        const real* p = frame.phase.data();
        fftw_complex* b = buffer_.get();
        for (Eigen::Index i = 0; i < n * n; ++i) {
            if (!std::isfinite(p[i])) throw numeric_error("propagate: non-finite phase");
            b[i][0] = std::cos(p[i]);
            b[i][1] = std::sin(p[i]);
        }
        fftw_execute(plan_.get());
        const real norm = 1.0 / static_cast<real>(n);
        const Eigen::Index half = n / 2;
        cimage out(n, n);
        // fftshift: DC lands at (n/2, n/2).
        for (Eigen::Index r = 0; r < n; ++r) {
            Eigen::Index rr = (r + half) % n;
            for (Eigen::Index c = 0; c < n; ++c) {
                Eigen::Index cc = (c + half) % n;
                const fftw_complex& v = b[r * n + c];
                out(rr, cc) = {v[0] * norm, v[1] * norm};
            }
        }
        return out;
    }

private:
    struct buffer_free {
        void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
    };
    struct plan_free {
        void operator()(fftw_plan p) const noexcept {
            std::lock_guard lock(detail::fftw_planner_mutex());
            fftw_destroy_plan(p);
        }
    };
    int grid_;
    std::unique_ptr<fftw_complex, buffer_free> buffer_;
    std::unique_ptr<std::remove_pointer_t<fftw_plan>, plan_free> plan_;
};

/// Fourier-plane field of a phase frame, using a per-thread cached plan.
inline cimage propagate(const phase_frame& frame) {
    thread_local std::map<Eigen::Index, std::unique_ptr<fourier_lens>> lenses;
    auto& lens = lenses[frame.phase.rows()];
    if (!lens) lens = std::make_unique<fourier_lens>(static_cast<int>(frame.phase.rows()));
    return lens->propagate(frame);
}

/// |field|^2 / saturation, clamped to [0, 1], rounded to 2^bits levels.
inline camera_image camera_read(const cimage& field, real saturation, int bits = 8) {
    if (!(saturation > 0) || !std::isfinite(saturation)) throw config_error("camera_read: saturation must be > 0");
    if (bits < 1 || bits > 24) throw config_error("camera_read: bits must be in [1, 24]");
    const real levels = std::ldexp(1.0, bits) - 1.0;
    camera_image out;
    out.bits = bits;
    out.intensity.resize(field.rows(), field.cols());
    const auto* f = field.data();
    real* o = out.intensity.data();
    for (Eigen::Index i = 0; i < field.size(); ++i) {
        real v = std::clamp(std::norm(f[i]) / saturation, 0.0, 1.0);
        o[i] = std::round(v * levels) / levels;
    }
    return out;
}

/// Mean intensity per super-block, row-major.  `nodes` must be k*k with k | grid.
inline vec pool_state(const camera_image& img, int nodes) {
    const auto grid = img.intensity.rows();
    const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(nodes))));
    if (nodes < 1 || k * k != nodes) throw config_error("pool_state: nodes must be a perfect square");
    if (grid % k != 0 || img.intensity.cols() != grid)
        throw config_error("pool_state: " + std::to_string(k) + " super-blocks per side do not divide grid " +
                           std::to_string(grid));
    const auto p = grid / k;
    vec out(nodes);
    for (int br = 0; br < k; ++br)
        for (int bc = 0; bc < k; ++bc) out[br * k + bc] = img.intensity.block(br * p, bc * p, p, p).mean();
    return out;
}

/// Saturation level = factor * mean Fourier-plane intensity of a uniformly
/// random phase frame (drawn from a fixed seed).
inline real calibrate_saturation(const slm_geometry& geom, real factor = 4.0, std::uint64_t seed = 0x5eed) {
    geom.validate();
    std::mt19937_64 rng(seed);
    phase_frame frame;
    frame.phase.resize(geom.grid, geom.grid);
    for (Eigen::Index i = 0; i < frame.phase.size(); ++i)
        frame.phase.data()[i] = max_phase * static_cast<real>(rng() >> 11) * 0x1.0p-53;
    cimage field = propagate(frame);
    return factor * field.cwiseAbs2().mean();
}

/// Writes an 8-bit binary PGM, mapping [0, full_scale] to [0, 255].
inline void write_pgm(const image& img, const std::string& path, real full_scale = 1.0) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write '" + path + "'");
    out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
    for (Eigen::Index r = 0; r < img.rows(); ++r)
        for (Eigen::Index c = 0; c < img.cols(); ++c) {
            real v = std::clamp(img(r, c) / full_scale, 0.0, 1.0);
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
        }
}

} // namespace oprc
