#include "sgdelta/waves.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "sgdelta/error.hpp"

namespace sgd {

namespace {

constexpr double kPi = std::numbers::pi;

// 4 arctan(e^xi), accurate near both limits 0 and 2 pi.
double kink_shape(double xi) {
    return xi <= 0.0 ? 4.0 * std::atan(std::exp(xi)) : 2.0 * kPi - 4.0 * std::atan(std::exp(-xi));
}

// d/dxi of kink_shape = 2 sech(xi).
double kink_slope(double xi) {
    const double e = std::exp(-std::abs(xi));
    return 4.0 * e / (1.0 + e * e);
}

void require_coupling(double q) {
    if (q == 0.0) {
        throw UndefinedCoupling("q = 0 has no impurity; matching root and ground state are undefined");
    }
}

}  // namespace

MatchingRoot matching_root(double q) {
    require_coupling(q);
    MatchingRoot r;
    r.q = q;
    r.exists = std::abs(q) > 2.0;
    if (r.exists) r.y = std::sqrt((q + 2.0) / (q - 2.0));
    return r;
}

FieldState kink_profile(const Grid1D& grid, double center) {
    auto s = FieldState::zeros(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) s.u1[i] = kink_shape(grid.x(i) - center);
    return s;
}

FieldState boosted_kink_state(const Grid1D& grid, double speed, double center, double t) {
    if (!(std::abs(speed) < 1.0)) {
        throw SuperluminalSpeed(fmt::format("kink speed must satisfy |v| < 1, got {}", speed));
    }
    const double contraction = std::sqrt(1.0 - speed * speed);
    auto s = FieldState::zeros(grid, t);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double xi = (grid.x(i) - speed * t - center) / contraction;
        s.u1[i] = kink_shape(xi);
        s.u2[i] = -speed / contraction * kink_slope(xi);
    }
    return s;
}

FieldState ground_state(const Grid1D& grid, double q) {
    const auto root = matching_root(q);
    if (!root.exists) {
        throw NoH1Wave(fmt::format(
            "no stationary H^1 wave exists for |q| <= 2 (got q = {})", q));
    }
    auto s = FieldState::zeros(grid);
    const std::size_t z = grid.zero_index();
    s.u1[z] = 4.0 * std::atan(root.y);
    for (std::size_t k = 1; k <= z; ++k) {
        // Fill both sides from the same value so the profile is exactly even.
        const double v = 4.0 * std::atan(root.y * std::exp(-grid.x(z + k)));
        s.u1[z + k] = v;
        s.u1[z - k] = v;
    }
    return s;
}

FieldState sample_wave(const Grid1D& grid, const WaveKind& wave, double t) {
    return std::visit(
        [&](const auto& w) -> FieldState {
            using W = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<W, Kink>) {
                auto s = kink_profile(grid, w.center);
                s.t = t;
                return s;
            } else if constexpr (std::is_same_v<W, GroundState>) {
                auto s = ground_state(grid, w.q);
                s.t = t;
                return s;
            } else {
                return boosted_kink_state(grid, w.speed, w.center, t);
            }
        },
        wave);
}

FieldState negated(FieldState state) {
    for (auto& v : state.u1) v = -v;
    for (auto& v : state.u2) v = -v;
    return state;
}

FieldState shifted_by_2pi(FieldState state, int k) {
    for (auto& v : state.u1) v += 2.0 * kPi * k;
    return state;
}

double gluing_residual(const FieldState& profile, double q) {
    const auto& g = profile.grid;
    const std::size_t z = g.zero_index();
    if (z < 2) throw InvalidGrid("gluing_residual needs at least two nodes on each side of x = 0");
    const auto& u = profile.u1;
    const double h = g.spacing();
    const double right = (-3.0 * u[z] + 4.0 * u[z + 1] - u[z + 2]) / (2.0 * h);
    const double left = (3.0 * u[z] - 4.0 * u[z - 1] + u[z - 2]) / (2.0 * h);
    return (right - left) - q * std::sin(u[z]);
}

double gluing_residual_exact(const WaveKind& wave, double q) {
    return std::visit(
        [q](const auto& w) -> double {
            using W = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<W, Kink>) {
                // Smooth at the origin: no derivative jump.
                return -q * std::sin(kink_shape(-w.center));
            } else if constexpr (std::is_same_v<W, GroundState>) {
                const auto root = matching_root(w.q);
                if (!root.exists) throw NoH1Wave(fmt::format("no ground state for q = {}", w.q));
                const double y = root.y;
                const double slope = 4.0 * y / (1.0 + y * y);  // |Q_x(0 +- )|
                return (-slope - slope) - q * std::sin(4.0 * std::atan(y));
            } else {
                const double contraction = std::sqrt(1.0 - w.speed * w.speed);
                return -q * std::sin(kink_shape(-w.center / contraction));
            }
        },
        wave);
}

double discrete_gluing_residual(const FieldState& profile, double q) {
    const auto& g = profile.grid;
    const std::size_t z = g.zero_index();
    const auto& u = profile.u1;
    const double h = g.spacing();
    return ((u[z + 1] - u[z]) - (u[z] - u[z - 1])) / h - h * std::sin(u[z]) - q * std::sin(u[z]);
}

std::optional<double> kink_center(const FieldState& state) {
    const auto& u = state.u1;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const double a = u[i] - kPi;
        const double b = u[i + 1] - kPi;
        if (a == 0.0) return state.grid.x(i);
        if ((a < 0.0) != (b < 0.0) && b != 0.0) {
            const double frac = a / (a - b);
            return state.grid.x(i) + frac * state.grid.spacing();
        }
    }
    return std::nullopt;
}

}  // namespace sgd
