#pragma once

// Correlation-weighted spatial reservoir driven through the optics model:
//   x(t) = f{ [alpha x(t-1) + beta W_in .* W_cor .* u(t)] W_res }
// where W_res and f are the Fourier lens and the saturating camera.

#include <cstdint>
#include <optional>
#include <random>

#include "oprc/features.hpp"
#include "oprc/optics.hpp"

namespace oprc {

struct reservoir_config {
    real alpha = 0.2;          ///< feedback gain
    real beta = 0.8;           ///< input gain
    slm_geometry geometry{};
    int nodes = 1600;          ///< pooled readout size (40 x 40)
    real saturation = 0;       ///< <= 0: calibrate from `saturation_factor`
    real saturation_factor = 4.0;
    int bits = 8;
    int washout = 50;
    std::uint64_t seed = 1;

    void validate() const {
        geometry.validate();
        if (alpha < 0 || beta < 0) throw config_error("reservoir: gains must be non-negative");
        if (alpha == 0 && beta == 0) throw config_error("reservoir: alpha and beta cannot both be 0");
        if (washout < 0) throw config_error("reservoir: washout must be >= 0");
        if (saturation <= 0 && saturation_factor <= 0) throw config_error("reservoir: saturation must be > 0");
    }
};

/// W_in and the tiled W_cor, laid out block-for-block like the inputs.
struct input_weights {
    image w_in;
    image w_cor_tiled;

    [[nodiscard]] image combined() const { return w_in.cwiseProduct(w_cor_tiled); }
};

/// Rows are pooled states after washout.
using state_matrix = mat;

class reservoir {
public:
    reservoir(const reservoir_config& config, const correlation_weights& cw, int n_inputs)
        : config_(config), n_inputs_(n_inputs) {
        config_.validate();
        const auto& g = config_.geometry;
        if (n_inputs < 1 || n_inputs > g.block_count())
            throw capacity_error("reservoir: " + std::to_string(n_inputs) + " inputs exceed " +
                                 std::to_string(g.block_count()) + " SLM blocks");
        const auto k = cw.weights.size();
        if (k < 1 || n_inputs % k != 0)
            throw shape_error("reservoir: correlation weights (" + std::to_string(k) +
                              ") must tile the input vector (" + std::to_string(n_inputs) + ")");

        std::mt19937_64 rng(config_.seed);
        weights_.w_in.resize(g.grid, g.grid);
        for (Eigen::Index i = 0; i < weights_.w_in.size(); ++i)
            weights_.w_in.data()[i] = static_cast<real>(rng() >> 11) * 0x1.0p-53;

        // Per-slot weights repeat the per-feature vector for every stacked timestep.
        vec slot(n_inputs);
        for (int i = 0; i < n_inputs; ++i) slot[i] = cw.weights[i % k];
        weights_.w_cor_tiled = tile_inputs(slot, g);
        mixed_ = weights_.combined();
        bounds_ = {0.0, config_.alpha + config_.beta * mixed_.maxCoeff()};
        if (!(bounds_.hi > bounds_.lo)) throw config_error("reservoir: phase bounds collapse (all weights zero?)");

        saturation_ = config_.saturation > 0 ? config_.saturation
                                              : calibrate_saturation(g, config_.saturation_factor);
        lens_ = std::make_unique<fourier_lens>(g.grid);
        reset();
    }

    [[nodiscard]] const reservoir_config& config() const noexcept { return config_; }
    [[nodiscard]] const input_weights& weights() const noexcept { return weights_; }
    [[nodiscard]] phase_bounds bounds() const noexcept { return bounds_; }
    [[nodiscard]] real saturation() const noexcept { return saturation_; }
    [[nodiscard]] int n_inputs() const noexcept { return n_inputs_; }
    [[nodiscard]] const camera_image& state() const noexcept { return state_; }

    /// Back to the all-zero camera image.
    void reset() {
        state_.bits = config_.bits;
        state_.intensity = image::Zero(config_.geometry.grid, config_.geometry.grid);
    }

    void set_state(camera_image s) {
        if (s.intensity.rows() != config_.geometry.grid || s.intensity.cols() != config_.geometry.grid)
            throw shape_error("reservoir: state geometry mismatch");
        state_ = std::move(s);
    }

    /// One update; stores the full camera frame for feedback, returns the pooled state.
    vec step(const vec& u) {
        if (u.size() != n_inputs_) throw shape_error("reservoir: input length mismatch");
        if (!u.allFinite()) throw numeric_error("reservoir: non-finite input");
        image tiled = tile_inputs(u, config_.geometry);
        phase_frame phase = compose_phase(state_, tiled, mixed_, config_.alpha, config_.beta, bounds_);
        state_ = camera_read(lens_->propagate(phase), saturation_, config_.bits);
        return pool_state(state_, config_.nodes);
    }

    /// Drives the rows of `inputs` in order and keeps the states after `washout`.
    state_matrix run_collect(const mat& inputs, int washout) {
        if (washout < 0) throw config_error("run_collect: washout must be >= 0");
        if (inputs.rows() <= washout)
            throw length_error("run_collect: " + std::to_string(inputs.rows()) + " inputs do not exceed washout " +
                               std::to_string(washout));
        state_matrix out(inputs.rows() - washout, config_.nodes);
        for (Eigen::Index t = 0; t < inputs.rows(); ++t) {
            vec s = step(inputs.row(t).transpose());
            if (t >= washout) out.row(t - washout) = s.transpose();
        }
        return out;
    }

private:
    reservoir_config config_;
    int n_inputs_;
    input_weights weights_;
    image mixed_;
    phase_bounds bounds_;
    real saturation_ = 1;
    std::unique_ptr<fourier_lens> lens_;
    camera_image state_;
};

} // namespace oprc
