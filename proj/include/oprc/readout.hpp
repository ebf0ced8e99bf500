#pragma once

// Linear readout (ridge with an unpenalized bias) and the evaluation metrics.

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "oprc/types.hpp"

namespace oprc {

/// W_out with the bias as its last row (zero when fitted without intercept).
struct readout_weights {
    mat w_out;
    real ridge_lambda = 0;

    [[nodiscard]] Eigen::Index horizon() const noexcept { return w_out.cols(); }
    [[nodiscard]] Eigen::Index inputs() const noexcept { return w_out.rows() - 1; }
    [[nodiscard]] auto coefficients() const { return w_out.topRows(w_out.rows() - 1); }
    [[nodiscard]] auto bias() const { return w_out.row(w_out.rows() - 1); }
};

/// Thin SVD of the (centered) design; solves the ridge problem for any lambda
/// without refactorizing.
class ridge_path {
public:
    ridge_path(const mat& x, const mat& y, bool fit_intercept = true) : intercept_(fit_intercept) {
        if (x.rows() != y.rows())
            throw shape_error("train_ridge: X has " + std::to_string(x.rows()) + " rows, Y has " +
                              std::to_string(y.rows()));
        if (x.rows() < 1 || x.cols() < 1 || y.cols() < 1) throw shape_error("train_ridge: empty system");
        if (!x.allFinite() || !y.allFinite()) throw numeric_error("train_ridge: non-finite input");
        if (intercept_) {
            x_mean_ = x.colwise().mean();
            y_mean_ = y.colwise().mean();
        } else {
            x_mean_ = Eigen::RowVectorXd::Zero(x.cols());
            y_mean_ = Eigen::RowVectorXd::Zero(y.cols());
        }
        mat xc = x.rowwise() - x_mean_;
        mat yc = y.rowwise() - y_mean_;
        Eigen::BDCSVD<mat> svd(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
        s_ = svd.singularValues();
        v_ = svd.matrixV();
        uty_ = svd.matrixU().transpose() * yc;
        cols_ = x.cols();
        const real smax = s_.size() ? s_[0] : 0.0;
        const real tol = static_cast<real>(std::max(x.rows(), x.cols())) * std::numeric_limits<real>::epsilon() * smax;
        rank_ = 0;
        for (Eigen::Index i = 0; i < s_.size(); ++i)
            if (s_[i] > tol) ++rank_;
    }

    [[nodiscard]] Eigen::Index rank() const noexcept { return rank_; }

    [[nodiscard]] readout_weights solve(real lambda) const {
        if (!(lambda >= 0) || !std::isfinite(lambda)) throw domain_error("train_ridge: lambda must be >= 0");
        if (lambda == 0 && rank_ < cols_)
            throw singular_error("train_ridge: design has rank " + std::to_string(rank_) + " < " +
                                 std::to_string(cols_) + " columns; use lambda > 0");
        vec filt(s_.size());
        for (Eigen::Index i = 0; i < s_.size(); ++i) {
            real si = s_[i];
            filt[i] = (lambda == 0 || si == 0) ? (si > 0 ? 1.0 / si : 0.0) : si / (si * si + lambda);
        }
        mat coef = v_ * (filt.asDiagonal() * uty_);
        readout_weights w;
        w.ridge_lambda = lambda;
        w.w_out.resize(cols_ + 1, coef.cols());
        w.w_out.topRows(cols_) = coef;
        w.w_out.row(cols_) = intercept_ ? (y_mean_ - x_mean_ * coef).eval() : Eigen::RowVectorXd::Zero(coef.cols());
        return w;
    }

private:
    bool intercept_;
    Eigen::RowVectorXd x_mean_, y_mean_;
    vec s_;
    mat v_, uty_;
    Eigen::Index cols_ = 0;
    Eigen::Index rank_ = 0;
};

/// argmin ||[X 1] W - Y||^2 + lambda ||W_no-bias||^2.
inline readout_weights train_ridge(const mat& x, const mat& y, real lambda, bool fit_intercept = true) {
    return ridge_path(x, y, fit_intercept).solve(lambda);
}

inline mat predict(const readout_weights& w, const mat& x) {
    if (x.cols() != w.inputs())
        throw shape_error("predict: X has " + std::to_string(x.cols()) + " columns, weights expect " +
                          std::to_string(w.inputs()));
    return (x * w.coefficients()).rowwise() + w.bias();
}

/// sqrt(sum (y - yhat)^2) / sqrt(sum (y - mean(y))^2).
inline real nrmse(std::span<const real> y, std::span<const real> y_hat) {
    if (y.size() != y_hat.size()) throw shape_error("nrmse: length mismatch");
    if (y.size() < 2) throw length_error("nrmse: need at least 2 values");
    real mean = 0;
    for (real v : y) mean += v;
    mean /= static_cast<real>(y.size());
    real num = 0, den = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        num += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
        den += (y[i] - mean) * (y[i] - mean);
    }
    if (den == 0) throw degenerate_error("nrmse: true series is constant");
    return std::sqrt(num) / std::sqrt(den);
}

inline real nrmse(const vec& y, const vec& y_hat) {
    return nrmse(std::span<const real>(y.data(), static_cast<std::size_t>(y.size())),
                 std::span<const real>(y_hat.data(), static_cast<std::size_t>(y_hat.size())));
}

/// NRMSE pooled over every entry of a T x h block.
inline real nrmse_multistep(const mat& y, const mat& y_hat) {
    if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols()) throw shape_error("nrmse_multistep: shape mismatch");
    return nrmse(std::span<const real>(y.data(), static_cast<std::size_t>(y.size())),
                 std::span<const real>(y_hat.data(), static_cast<std::size_t>(y_hat.size())));
}

inline vec nrmse_per_step(const mat& y, const mat& y_hat) {
    if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols()) throw shape_error("nrmse_per_step: shape mismatch");
    vec out(y.cols());
    for (Eigen::Index j = 0; j < y.cols(); ++j) out[j] = nrmse(vec(y.col(j)), vec(y_hat.col(j)));
    return out;
}

/// 1 - nrmse_rc / nrmse_ml.
inline real error_reduction(real nrmse_rc, real nrmse_ml) {
    if (!(nrmse_ml > 0)) throw domain_error("error_reduction: baseline NRMSE must be positive");
    if (!(nrmse_rc >= 0)) throw domain_error("error_reduction: NRMSE cannot be negative");
    return 1.0 - nrmse_rc / nrmse_ml;
}

struct lambda_choice {
    real lambda = 0;
    real validation_nrmse = 0;
};

/// Picks lambda on the last `validation_fraction` of the rows (chronological
/// tail), fitting on the rows before it.  Earlier grid entries win ties.
inline lambda_choice select_ridge_lambda(const mat& x, const mat& y, const std::vector<real>& grid,
                                         real validation_fraction = 0.2) {
    if (grid.empty()) throw config_error("select_ridge_lambda: empty lambda grid");
    if (!(validation_fraction > 0 && validation_fraction < 1))
        throw config_error("select_ridge_lambda: validation fraction must be in (0, 1)");
    const auto n_val = std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::floor(validation_fraction * x.rows())));
    const auto n_fit = x.rows() - n_val;
    if (n_fit < 2) throw length_error("select_ridge_lambda: too few rows for a validation tail");
    ridge_path path(x.topRows(n_fit), y.topRows(n_fit));
    mat xv = x.bottomRows(n_val), yv = y.bottomRows(n_val);
    lambda_choice best{grid.front(), std::numeric_limits<real>::infinity()};
    for (real lambda : grid) {
        real score;
        try {
            score = nrmse_multistep(yv, predict(path.solve(lambda), xv));
        } catch (const singular_error&) {
            continue;
        }
        if (score < best.validation_nrmse) best = {lambda, score};
    }
    if (!std::isfinite(best.validation_nrmse)) throw singular_error("select_ridge_lambda: no usable lambda");
    return best;
}

} // namespace oprc
