#include "sgdelta/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "sgdelta/error.hpp"
#include "sgdelta/mollifier.hpp"

namespace sgd {

Grid1D::Grid1D(double half_width, std::size_t node_count)
    : half_width_(half_width),
      node_count_(node_count),
      spacing_(2.0 * half_width / static_cast<double>(node_count - 1)),
      zero_index_((node_count - 1) / 2) {}

Grid1D Grid1D::make(double half_width, std::size_t node_count) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw InvalidGrid(fmt::format("half width must be positive and finite, got {}", half_width));
    }
    if (node_count < 3 || node_count % 2 == 0) {
        throw InvalidGrid(fmt::format(
            "node count must be odd and >= 3 so that x = 0 is a node, got {}", node_count));
    }
    return Grid1D(half_width, node_count);
}

std::vector<double> Grid1D::nodes() const {
    std::vector<double> xs(node_count_);
    for (std::size_t i = 0; i < node_count_; ++i) xs[i] = x(i);
    return xs;
}

FieldState FieldState::zeros(const Grid1D& grid, double t) {
    return FieldState{grid, std::vector<double>(grid.size(), 0.0),
                      std::vector<double>(grid.size(), 0.0), t};
}

void FieldState::validate() const {
    if (u1.size() != grid.size() || u2.size() != grid.size()) {
        throw InvalidArgument(fmt::format("field state has {}/{} samples on a {}-node grid",
                                          u1.size(), u2.size(), grid.size()));
    }
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(u1.begin(), u1.end(), finite) || !std::all_of(u2.begin(), u2.end(), finite)) {
        throw InvalidArgument("field state contains non-finite samples");
    }
}

void ImpurityParams::validate(const Grid1D& grid) const {
    if (!std::isfinite(q)) throw InvalidArgument("coupling q must be finite");
    if (mode == DeltaMode::Mollified) {
        if (!(epsilon > 0.0)) {
            throw InvalidArgument(fmt::format("mollifier width must be positive, got {}", epsilon));
        }
        if (epsilon < 2.0 * grid.spacing() * (1.0 - 1e-12)) {
            throw UnresolvedMollifier(fmt::format(
                "mollifier width {} is below 2*dx = {}", epsilon, 2.0 * grid.spacing()));
        }
    }
}

namespace {

void require_size(const Grid1D& grid, std::span<const double> f) {
    if (f.size() != grid.size()) {
        throw GridMismatch(fmt::format("{} samples on a {}-node grid", f.size(), grid.size()));
    }
}

}  // namespace

double integrate(const Grid1D& grid, std::span<const double> f) {
    require_size(grid, f);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += grid.weight(i) * f[i];
    return s;
}

double l2_norm(const Grid1D& grid, std::span<const double> f) {
    require_size(grid, f);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += grid.weight(i) * f[i] * f[i];
    return std::sqrt(s);
}

std::vector<double> centered_gradient(const Grid1D& grid, std::span<const double> f) {
    require_size(grid, f);
    const std::size_t n = f.size();
    const double h = grid.spacing();
    std::vector<double> g(n);
    for (std::size_t i = 1; i + 1 < n; ++i) g[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    g[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    g[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    return g;
}

double cell_dirichlet_energy(const Grid1D& grid, std::span<const double> f) {
    require_size(grid, f);
    const double h = grid.spacing();
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        const double d = f[i + 1] - f[i];
        s += d * d;
    }
    return s / h;
}

double h1_norm_squared(const Grid1D& grid, std::span<const double> f) {
    const double v = l2_norm(grid, f);
    const double g = l2_norm(grid, centered_gradient(grid, f));
    return v * v + g * g;
}

DeviationNorm deviation_norm(const FieldState& state, const FieldState& reference) {
    if (!(state.grid == reference.grid)) throw GridMismatch("deviation_norm: states live on different grids");
    const auto& grid = state.grid;
    require_size(grid, state.u1);
    require_size(grid, reference.u1);
    require_size(grid, state.u2);
    require_size(grid, reference.u2);

    std::vector<double> d1(grid.size()), d2(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        d1[i] = state.u1[i] - reference.u1[i];
        d2[i] = state.u2[i] - reference.u2[i];
    }
    DeviationNorm out;
    out.h1_part = std::sqrt(h1_norm_squared(grid, d1));
    out.l2_part = l2_norm(grid, d2);
    out.total = out.h1_part + out.l2_part;
    return out;
}

EnergyBreakdown energy(const FieldState& state, const ImpurityParams& params) {
    if (params.mode == DeltaMode::Mollified) {
        const auto rho = mollifier_profile(state.grid, params.epsilon);
        return energy(state, params, &rho);
    }
    return energy(state, params, nullptr);
}

EnergyBreakdown energy(const FieldState& state, const ImpurityParams& params,
                       const MollifierProfile* mollifier) {
    const auto& grid = state.grid;
    require_size(grid, state.u1);
    require_size(grid, state.u2);

    EnergyBreakdown e;
    double kin = 0.0, pot = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid.weight(i);
        kin += w * state.u2[i] * state.u2[i];
        pot += w * (1.0 - std::cos(state.u1[i]));
    }
    e.kinetic = 0.5 * kin;
    e.gradient = 0.5 * cell_dirichlet_energy(grid, state.u1);
    e.potential = pot;

    if (params.mode == DeltaMode::Sharp) {
        e.delta_term = params.q * (1.0 - std::cos(state.u1[grid.zero_index()]));
    } else {
        if (mollifier == nullptr) throw InvalidArgument("mollified energy needs a mollifier profile");
        if (params.coupling == MollifiedCoupling::Paired) {
            e.delta_term = params.q * (1.0 - std::cos(mollifier->pair(grid, state.u1)));
        } else {
            const auto rho = mollifier->samples();
            double s = 0.0;
            for (std::size_t i = mollifier->first(); i <= mollifier->last(); ++i) {
                s += grid.weight(i) * rho[i] * (1.0 - std::cos(state.u1[i]));
            }
            e.delta_term = params.q * s;
        }
    }
    e.total = e.kinetic + e.gradient + e.potential + e.delta_term;
    return e;
}

SinSeminorms sin_seminorms(const FieldState& state) {
    const auto& grid = state.grid;
    std::vector<double> s(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) s[i] = std::sin(0.5 * state.u1[i]);
    return {l2_norm(grid, centered_gradient(grid, state.u1)), l2_norm(grid, s)};
}

GagliardoCheck gagliardo_check(const Grid1D& grid, std::span<const double> f, double a) {
    if (!(a > 0.0)) throw InvalidArgument("gagliardo_check: a must be positive");
    require_size(grid, f);
    double peak = 0.0;
    for (double v : f) peak = std::max(peak, std::abs(v));
    const double l2 = l2_norm(grid, f);
    const double gx = l2_norm(grid, centered_gradient(grid, f));
    GagliardoCheck c;
    c.lhs = 2.0 * peak * peak;
    c.rhs = a * l2 * l2 + gx * gx / a;
    c.tolerance = 10.0 * grid.spacing() * (l2 * l2 + gx * gx);
    return c;
}

}  // namespace sgd
