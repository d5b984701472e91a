#pragma once

// Closed-form stationary and traveling waves, and the interface (gluing)
// algebra at the impurity.

#include <optional>
#include <variant>

#include "sgdelta/core.hpp"

namespace sgd {

struct Kink {
    double center = 0.0;
};
struct GroundState {
    double q = 0.0;
};
struct BoostedKink {
    double speed = 0.0;
    double center = 0.0;
};
using WaveKind = std::variant<Kink, GroundState, BoostedKink>;

/// Positive root y = e^{-x0} of  -2/q = (1 - y^2)/(1 + y^2).
struct MatchingRoot {
    double q = 0.0;
    double y = 0.0;
    bool exists = false;
};

/// Closed form y = sqrt((q+2)/(q-2)); exists iff |q| > 2.
/// Throws UndefinedCoupling for q == 0.
MatchingRoot matching_root(double q);

/// u1 = 4 arctan e^{x - x0}, u2 = 0.
FieldState kink_profile(const Grid1D& grid, double center);

/// Lorentz-boosted kink sampled at time t, with u2 its exact time derivative.
/// Throws SuperluminalSpeed for |v| >= 1.
FieldState boosted_kink_state(const Grid1D& grid, double speed, double center, double t);

/// Even positive stationary wave 4 arctan(y e^{-|x|}). Throws NoH1Wave for
/// |q| <= 2 and UndefinedCoupling for q == 0.
FieldState ground_state(const Grid1D& grid, double q);

/// Samples any wave kind at time t (only BoostedKink depends on t).
FieldState sample_wave(const Grid1D& grid, const WaveKind& wave, double t = 0.0);

/// Symmetry operations used instead of storing sign-flipped or 2*pi-shifted variants.
FieldState negated(FieldState state);
FieldState shifted_by_2pi(FieldState state, int k);

/// r = [u_x(0+) - u_x(0-)] - q sin u(0), one-sided derivatives by
/// second-order three-point stencils at the zero node.
double gluing_residual(const FieldState& profile, double q);

/// Same residual with closed-form one-sided derivatives of the wave at t = 0.
double gluing_residual_exact(const WaveKind& wave, double q);

/// Scheme-consistent residual at the zero node: the cell-averaged equation
///     [(u_1 - u_0) - (u_0 - u_{-1})]/dx - dx sin u_0 - q sin u_0,
/// which is what a discrete energy minimizer drives to zero.
double discrete_gluing_residual(const FieldState& profile, double q);

/// Location of the first u1 = pi crossing (linear interpolation), if any.
std::optional<double> kink_center(const FieldState& state);

}  // namespace sgd
