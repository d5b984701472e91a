#pragma once

#include <span>
#include <vector>

#include "sgdelta/core.hpp"

namespace sgd {

/// Discrete unit-mass bump approximating delta_0:
///     rho_eps(x) = eps^-1 rho(x / eps),  rho(s) ~ exp(-1 / (1 - s^2)) on |s| < 1,
/// renormalized so that its trapezoid quadrature on the grid is exactly 1.
class MollifierProfile {
public:
    double epsilon() const noexcept { return epsilon_; }
    double mass() const noexcept { return mass_; }
    std::span<const double> samples() const noexcept { return samples_; }

    /// Nodes with non-zero weight: [first, last].
    std::size_t first() const noexcept { return first_; }
    std::size_t last() const noexcept { return last_; }

    /// <rho_eps, f> by trapezoid quadrature.
    double pair(const Grid1D& grid, std::span<const double> f) const;

private:
    friend MollifierProfile mollifier_profile(const Grid1D& grid, double epsilon);

    double epsilon_ = 0.0;
    double mass_ = 0.0;
    std::vector<double> samples_;
    std::size_t first_ = 0;
    std::size_t last_ = 0;
};

/// Throws UnresolvedMollifier when epsilon < 2 dx.
MollifierProfile mollifier_profile(const Grid1D& grid, double epsilon);

}  // namespace sgd
