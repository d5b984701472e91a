#include "sgdelta/dynamics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "sgdelta/error.hpp"

namespace sgd {

ForceField::ForceField(const Grid1D& grid, const ImpurityParams& params, Nonlinearity nonlinearity)
    : grid_(grid), params_(params), nonlinearity_(nonlinearity) {
    params_.validate(grid_);
    if (params_.mode == DeltaMode::Mollified) mollifier_ = mollifier_profile(grid_, params_.epsilon);
}

void ForceField::acceleration(std::span<const double> u, std::span<double> acc) const {
    const std::size_t n = grid_.size();
    const double inv_h2 = 1.0 / (grid_.spacing() * grid_.spacing());
    const bool linear = nonlinearity_ == Nonlinearity::LinearKleinGordon;

    acc[0] = 0.0;
    acc[n - 1] = 0.0;
    if (linear) {
        for (std::size_t i = 1; i + 1 < n; ++i) acc[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_h2 - u[i];
    } else {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            acc[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_h2 - std::sin(u[i]);
        }
    }

    const double q = params_.q;
    if (q == 0.0) return;
    if (params_.mode == DeltaMode::Sharp) {
        const std::size_t z = grid_.zero_index();
        const double f = linear ? u[z] : std::sin(u[z]);
        acc[z] -= q * f / grid_.spacing();
        return;
    }

    const auto rho = mollifier_->samples();
    const std::size_t lo = std::max<std::size_t>(mollifier_->first(), 1);
    const std::size_t hi = std::min(mollifier_->last(), n - 2);
    if (params_.coupling == MollifiedCoupling::Paired) {
        const double paired = mollifier_->pair(grid_, u);
        const double f = linear ? paired : std::sin(paired);
        for (std::size_t i = lo; i <= hi; ++i) acc[i] -= q * rho[i] * f;
    } else {
        for (std::size_t i = lo; i <= hi; ++i) acc[i] -= q * rho[i] * (linear ? u[i] : std::sin(u[i]));
    }
}

EnergyBreakdown ForceField::energy(const FieldState& state) const {
    if (nonlinearity_ == Nonlinearity::SineGordon) return sgd::energy(state, params_, mollifier());

    // Quadratic energy of the linear problem.
    EnergyBreakdown e;
    double kin = 0.0, pot = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        kin += grid_.weight(i) * state.u2[i] * state.u2[i];
        pot += grid_.weight(i) * state.u1[i] * state.u1[i];
    }
    e.kinetic = 0.5 * kin;
    e.gradient = 0.5 * cell_dirichlet_energy(grid_, state.u1);
    e.potential = 0.5 * pot;
    if (params_.mode == DeltaMode::Sharp) {
        const double u0 = state.u1[grid_.zero_index()];
        e.delta_term = 0.5 * params_.q * u0 * u0;
    } else if (params_.coupling == MollifiedCoupling::Paired) {
        const double p = mollifier_->pair(grid_, state.u1);
        e.delta_term = 0.5 * params_.q * p * p;
    } else {
        const auto rho = mollifier_->samples();
        double s = 0.0;
        for (std::size_t i = mollifier_->first(); i <= mollifier_->last(); ++i) {
            s += grid_.weight(i) * rho[i] * state.u1[i] * state.u1[i];
        }
        e.delta_term = 0.5 * params_.q * s;
    }
    e.total = e.kinetic + e.gradient + e.potential + e.delta_term;
    return e;
}

namespace {

void check_cfl(const Grid1D& grid, double dt) {
    if (dt == 0.0 || !std::isfinite(dt)) throw InvalidArgument("time step must be finite and non-zero");
    if (std::abs(dt) > kCflLimit * grid.spacing() * (1.0 + 1e-12)) {
        throw CflViolation(fmt::format("|dt| = {} exceeds the CFL limit 0.9*dx = {}", std::abs(dt),
                                       kCflLimit * grid.spacing()));
    }
}

// u2 += h/2 acc; u1 += h u2 (interior); acc <- a(u1); u2 += h/2 acc.
void leapfrog(const ForceField& force, FieldState& s, std::vector<double>& acc, double h) {
    const std::size_t n = s.u1.size();
    const double half = 0.5 * h;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        s.u2[i] += half * acc[i];
        s.u1[i] += h * s.u2[i];
    }
    force.acceleration(s.u1, acc);
    for (std::size_t i = 1; i + 1 < n; ++i) s.u2[i] += half * acc[i];
    s.t += h;
}

void check_finite(const FieldState& s) {
    for (std::size_t i = 0; i < s.u1.size(); ++i) {
        if (!std::isfinite(s.u1[i]) || !std::isfinite(s.u2[i]) || std::abs(s.u2[i]) > kBlowUpVelocity) {
            throw BlowUp(s.t, fmt::format("non-finite or runaway state at t = {} (node {}); this is a "
                                          "scheme failure, not a property of the equation",
                                          s.t, i));
        }
    }
}

double bound_functional(const FieldState& s) {
    std::vector<double> sn(s.u1.size());
    for (std::size_t i = 0; i < sn.size(); ++i) sn[i] = std::sin(s.u1[i]);
    return l2_norm(s.grid, sn) + l2_norm(s.grid, s.u2) +
           l2_norm(s.grid, centered_gradient(s.grid, s.u1));
}

}  // namespace

FieldState step(const FieldState& state, const ImpurityParams& params, double dt,
                Nonlinearity nonlinearity) {
    state.validate();
    check_cfl(state.grid, dt);
    const ForceField force(state.grid, params, nonlinearity);
    FieldState out = state;
    std::vector<double> acc(state.grid.size());
    force.acceleration(out.u1, acc);
    leapfrog(force, out, acc, dt);
    check_finite(out);
    return out;
}

double Trajectory::max_relative_energy_drift() const {
    if (energies.empty()) return 0.0;
    const double e0 = energies.front().total;
    const double scale = std::max(std::abs(e0), 1.0);
    double worst = 0.0;
    for (const auto& e : energies) worst = std::max(worst, std::abs(e.total - e0) / scale);
    return worst;
}

double Trajectory::bound_ratio() const {
    if (bound_series.empty() || bound_series.front() == 0.0) return 1.0;
    return *std::max_element(bound_series.begin(), bound_series.end()) / bound_series.front();
}

Trajectory evolve(const FieldState& initial, const ImpurityParams& params, double horizon, double dt,
                  const EvolveOptions& options) {
    initial.validate();
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InvalidArgument(fmt::format("horizon must be positive, got {}", horizon));
    }
    check_cfl(initial.grid, dt);
    if (options.output_stride == 0) throw InvalidArgument("output stride must be positive");

    const auto started = std::chrono::steady_clock::now();
    const ForceField force(initial.grid, params, options.nonlinearity);

    Trajectory traj;
    traj.final_state = initial;
    traj.dt = dt;
    traj.dx = initial.grid.spacing();
    traj.params = params;

    const double h = std::abs(dt);
    const double sign = dt > 0.0 ? 1.0 : -1.0;
    const auto full_steps = static_cast<std::size_t>(std::floor(horizon / h + 1e-9));
    const double remainder = horizon - static_cast<double>(full_steps) * h;
    const bool partial = remainder > 1e-12 * h;
    const std::size_t total_steps = full_steps + (partial ? 1 : 0);
    const double t0 = initial.t;

    FieldState s = initial;
    std::vector<double> acc(s.grid.size());
    force.acceleration(s.u1, acc);

    auto record = [&](const FieldState& st) {
        traj.times.push_back(st.t);
        traj.energies.push_back(force.energy(st));
        traj.bound_series.push_back(bound_functional(st));
        if (options.store_states) traj.states.push_back(st);
        if (options.observer) options.observer(st);
    };

    auto should_stop = [&](const FieldState& st) { return options.stop_when && options.stop_when(st); };

    record(s);
    for (std::size_t k = 1; k <= total_steps && !traj.stopped_early; ++k) {
        const bool last = k == total_steps;
        const double hk = (last && partial) ? remainder : h;
        leapfrog(force, s, acc, sign * hk);
        s.t = last ? t0 + sign * horizon : t0 + sign * static_cast<double>(k) * h;
        check_finite(s);
        if (k % options.output_stride == 0 || last) {
            record(s);
            traj.stopped_early = !last && should_stop(s);
        }
    }

    traj.final_state = std::move(s);
    traj.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return traj;
}

// ---------------------------------------------------------------------------

namespace {

using Quadrature = boost::math::quadrature::gauss_kronrod<double, 61>;

// J1(s)/s, finite at s = 0.
double bessel_j1_over_arg(double s) {
    if (s < 1e-6) return 0.5 - s * s / 16.0;
    return std::cyl_bessel_j(1.0, s) / s;
}

// (G(t) * f)(x)
double kernel_convolution(const std::function<double(double)>& f, double x, double t) {
    if (t <= 0.0) return 0.0;
    auto integrand = [&](double y) {
        const double s2 = std::max(t * t - y * y, 0.0);
        return 0.5 * std::cyl_bessel_j(0.0, std::sqrt(s2)) * f(x - y);
    };
    return Quadrature::integrate(integrand, -t, t, 12, 1e-14);
}

// (d/dt G(t) * f)(x)
double kernel_time_derivative_convolution(const std::function<double(double)>& f, double x, double t) {
    if (t <= 0.0) return f(x);
    auto integrand = [&](double y) {
        const double s = std::sqrt(std::max(t * t - y * y, 0.0));
        return -0.5 * t * bessel_j1_over_arg(s) * f(x - y);
    };
    return 0.5 * (f(x - t) + f(x + t)) + Quadrature::integrate(integrand, -t, t, 12, 1e-14);
}

double linear_solution(const LinearDatum& d, double x, double t) {
    double v = 0.0;
    if (d.u1) v += kernel_time_derivative_convolution(d.u1, x, t);
    if (d.u2) v += kernel_convolution(d.u2, x, t);
    return v;
}

}  // namespace

FieldState linear_kg_reference(const Grid1D& grid, const LinearDatum& datum, double t) {
    if (!(t >= 0.0)) throw InvalidArgument("linear_kg_reference: t must be non-negative");
    const double reach = datum.support_radius + t;
    if (reach >= grid.half_width()) {
        throw LightConeExit(fmt::format("light cone radius {} reaches the domain edge {}", reach,
                                        grid.half_width()));
    }

    auto out = FieldState::zeros(grid, t);
    // Time derivative by Richardson-extrapolated central differences.
    const double delta = std::min(1e-3, 0.5 * t);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.x(i);
        if (std::abs(x) > reach) continue;  // outside the light cone: exactly zero
        out.u1[i] = linear_solution(datum, x, t);
        if (delta > 0.0) {
            auto central = [&](double h) {
                return (linear_solution(datum, x, t + h) - linear_solution(datum, x, t - h)) / (2.0 * h);
            };
            out.u2[i] = (4.0 * central(0.5 * delta) - central(delta)) / 3.0;
        } else {
            out.u2[i] = datum.u2 ? datum.u2(x) : 0.0;
        }
    }
    return out;
}

namespace {

// 4-point Lagrange interpolation of nodal samples; zero outside the grid.
std::function<double(double)> interpolant(const Grid1D& grid, const std::vector<double>& f) {
    return [&grid, &f](double x) {
        const double h = grid.spacing();
        const double pos = x / h + static_cast<double>(grid.zero_index());
        if (pos < 0.0 || pos > static_cast<double>(grid.size() - 1)) return 0.0;
        auto i = static_cast<std::ptrdiff_t>(std::floor(pos));
        i = std::clamp<std::ptrdiff_t>(i - 1, 0, static_cast<std::ptrdiff_t>(grid.size()) - 4);
        const double s = pos - static_cast<double>(i);
        double v = 0.0;
        for (int a = 0; a < 4; ++a) {
            double w = 1.0;
            for (int b = 0; b < 4; ++b) {
                if (b != a) w *= (s - b) / static_cast<double>(a - b);
            }
            v += w * f[static_cast<std::size_t>(i + a)];
        }
        return v;
    };
}

}  // namespace

FieldState linear_kg_reference(const FieldState& initial, double t) {
    initial.validate();
    const auto& grid = initial.grid;
    double radius = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(initial.u1[i]) > 1e-12 || std::abs(initial.u2[i]) > 1e-12) {
            radius = std::max(radius, std::abs(grid.x(i)) + grid.spacing());
            any = true;
        }
    }
    if (!any) return FieldState::zeros(grid, t);

    LinearDatum datum;
    datum.u1 = interpolant(grid, initial.u1);
    datum.u2 = interpolant(grid, initial.u2);
    datum.support_radius = radius;
    return linear_kg_reference(grid, datum, t);
}

}  // namespace sgd
