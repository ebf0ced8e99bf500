#pragma once

// OLS / ridge (shared SVD solver with the readout) and lasso / elastic net
// by cyclic coordinate descent.  All fit on standardized columns.

#include <cmath>
#include <string>
#include <vector>

#include "oprc/baselines/supervised.hpp"
#include "oprc/readout.hpp"

namespace oprc {

struct linear_model {
    standardizer scaler;
    mat coef;                      ///< standardized-space coefficients, p x h
    Eigen::RowVectorXd intercept;  ///< h
    bool converged = true;
    real final_delta = 0;
    int sweeps = 0;

    [[nodiscard]] mat predict(const mat& x) const { return (scaler.apply(x) * coef).rowwise() + intercept; }
};

inline linear_model fit_ridge(const mat& x, const mat& y, real lambda) {
    linear_model m;
    m.scaler = standardizer::fit(x);
    readout_weights w = train_ridge(m.scaler.apply(x), y, lambda);
    m.coef = w.coefficients();
    m.intercept = w.bias();
    return m;
}

inline linear_model fit_ols(const mat& x, const mat& y) { return fit_ridge(x, y, 0.0); }

struct coordinate_descent_options {
    real tolerance = 1e-8;
    int max_sweeps = 10000;
};

/// Minimizes (1/2n)||y - Xw||^2 + l1 ||w||_1 + (l2/2) ||w||^2 per output column.
inline linear_model fit_elasticnet(const mat& x, const mat& y, real l1, real l2,
                                   coordinate_descent_options opt = {}) {
    if (l1 < 0 || l2 < 0) throw domain_error("fit_elasticnet: penalties must be >= 0");
    if (x.rows() != y.rows()) throw shape_error("fit_elasticnet: row mismatch");
    if (x.rows() < 1) throw shape_error("fit_elasticnet: empty system");
    linear_model m;
    m.scaler = standardizer::fit(x);
    const mat xs = m.scaler.apply(x);
    const auto n = static_cast<real>(x.rows());
    const auto p = xs.cols();
    vec col_sq(p);
    for (Eigen::Index j = 0; j < p; ++j) col_sq[j] = xs.col(j).squaredNorm() / n;

    m.coef = mat::Zero(p, y.cols());
    m.intercept = y.colwise().mean();
    for (Eigen::Index o = 0; o < y.cols(); ++o) {
        vec w = vec::Zero(p);
        vec r = y.col(o).array() - m.intercept[o];
        real delta = 0;
        int sweep = 0;
        while (sweep < opt.max_sweeps) {
            ++sweep;
            delta = 0;
            for (Eigen::Index j = 0; j < p; ++j) {
                if (col_sq[j] == 0) continue;
                real rho = xs.col(j).dot(r) / n + col_sq[j] * w[j];
                real next = std::copysign(std::max(std::abs(rho) - l1, 0.0), rho) / (col_sq[j] + l2);
                real change = next - w[j];
                if (change != 0) {
                    r -= change * xs.col(j);
                    w[j] = next;
                    delta = std::max(delta, std::abs(change));
                }
            }
            if (delta < opt.tolerance) break;
        }
        m.sweeps = std::max(m.sweeps, sweep);
        if (delta >= opt.tolerance) {
            m.converged = false;
            m.final_delta = std::max(m.final_delta, delta);
        }
        m.coef.col(o) = w;
    }
    return m;
}

inline linear_model fit_lasso(const mat& x, const mat& y, real l1, coordinate_descent_options opt = {}) {
    return fit_elasticnet(x, y, l1, 0.0, opt);
}

} // namespace oprc
