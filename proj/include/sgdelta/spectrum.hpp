#pragma once

// Linearization about a stationary wave K:
//     L_K = -d_xx + cos K,  domain condition  v_x(0+) - v_x(0-) = q cos(K(0)) v(0),
// discretized on the interior nodes (Dirichlet at +-L) as a symmetric
// tridiagonal matrix whose zero-node diagonal carries Z/dx, Z = q cos K(0).

#include <optional>
#include <span>
#include <vector>

#include "sgdelta/core.hpp"

namespace sgd {

class LinearizedOperator {
public:
    const Grid1D& grid() const noexcept { return grid_; }
    double coupling() const noexcept { return q_; }
    /// Z = q cos K(0).
    double interface_coefficient() const noexcept { return interface_; }
    std::span<const double> background() const noexcept { return background_; }

    /// Matrix over interior nodes 1..N-2: diagonal (size N-2) and the
    /// symmetric off-diagonal (size N-3).
    std::span<const double> diagonal() const noexcept { return diag_; }
    std::span<const double> off_diagonal() const noexcept { return off_; }
    std::size_t dimension() const noexcept { return diag_.size(); }

    /// (A v) on full-grid samples; boundary entries of v are ignored and
    /// the result is zero there.
    std::vector<double> apply(std::span<const double> v) const;

    /// max |cos K| + |Z|, floored at 1: bounded part of the operator.
    double potential_scale() const noexcept { return potential_scale_; }

private:
    friend LinearizedOperator assemble_linearized(const FieldState& background, double q);

    Grid1D grid_;
    double q_ = 0.0;
    double interface_ = 0.0;
    double potential_scale_ = 1.0;
    std::vector<double> background_;
    std::vector<double> diag_;
    std::vector<double> off_;
};

LinearizedOperator assemble_linearized(const FieldState& background, double q);

struct SpectralReport {
    std::vector<double> eigenvalues;               // ascending
    std::vector<std::vector<double>> eigenvectors; // full-grid samples, unit discrete L2
    std::vector<double> residuals;                 // ||A v - lambda v||_2 per pair
    int morse_index = 0;
    bool has_zero_mode = false;
    double tol_zero = 0.0;
    std::optional<double> ess_edge_estimate;
    double growth_rate = 0.0;
};

/// tol_zero = 10 dx^2 * potential_scale.
double zero_tolerance(const LinearizedOperator& op);

/// k lowest eigenpairs by Sturm-sequence bisection and inverse iteration.
/// Throws NonConvergence when a residual stays above `tol`.
SpectralReport eigen_bottom(const LinearizedOperator& op, std::size_t k, double tol = 1e-8);

/// Q_K(v, w) = sum_cells v_x w_x dx + sum_i w_i cos K_i v_i w_i + q cos K(0) v(0) w(0).
double bilinear_form(std::span<const double> v, std::span<const double> w,
                     const FieldState& background, double q);

/// sqrt(-lambda_1) when lambda_1 < 0, else 0.
double growth_rate(const SpectralReport& report);

/// 2 sin Q(0) + q Q_x(0+) cos Q(0) evaluated on ground-state samples
/// (one-sided second-order derivative).
double interface_identity_sampled(const FieldState& ground, double q);

/// Closed form -2 (q - 2) sqrt(q^2 - 4) / q^2 proposed for the same quantity.
double interface_identity_closed_form(double q);

}  // namespace sgd
