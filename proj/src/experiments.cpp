#include "sgdelta/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "sgdelta/error.hpp"
#include "sgdelta/jobs.hpp"
#include "sgdelta/spectrum.hpp"
#include "sgdelta/waves.hpp"

namespace sgd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Uniform double in [0, 1) from the raw 53 high bits; identical on every
// standard library, unlike std::uniform_real_distribution.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

FieldState add_scaled(const FieldState& base, const std::vector<double>& p1, const std::vector<double>& p2,
                      double scale) {
    FieldState s = base;
    for (std::size_t i = 0; i < s.u1.size(); ++i) {
        s.u1[i] += scale * p1[i];
        s.u2[i] += scale * p2[i];
    }
    return s;
}

// ||(p1, p2)||_{H^1 x L^2} with the deviation-norm conventions.
double pair_norm(const Grid1D& grid, const std::vector<double>& p1, const std::vector<double>& p2) {
    return std::sqrt(h1_norm_squared(grid, p1)) + l2_norm(grid, p2);
}

std::vector<double> normalized_h1(const Grid1D& grid, std::vector<double> v) {
    const double n = std::sqrt(h1_norm_squared(grid, v));
    if (n > 0.0) {
        for (auto& x : v) x /= n;
    }
    return v;
}

}  // namespace

std::string to_string(StationaryWave wave) {
    return wave == StationaryWave::Kink ? "kink" : "ground_state";
}

std::string to_string(ScatterClass c) {
    switch (c) {
        case ScatterClass::Transmit: return "transmit";
        case ScatterClass::Reflect: return "reflect";
        case ScatterClass::Capture: return "capture";
    }
    return "capture";
}

std::string to_string(Sector s) { return s == Sector::FreeH1 ? "free_h1" : "degree1"; }

FieldState stationary_wave(const Grid1D& grid, StationaryWave wave, double q) {
    return wave == StationaryWave::Kink ? kink_profile(grid, 0.0) : ground_state(grid, q);
}

double ExperimentGrid::time_step() const { return dt > 0.0 ? dt : default_time_step(grid()); }

std::vector<double> band_limited_noise(const Grid1D& grid, std::uint64_t seed, double k_max,
                                       double envelope_width) {
    constexpr int kModes = 6;
    std::mt19937_64 rng(seed);
    double k[kModes], phase[kModes], amp[kModes];
    for (int j = 0; j < kModes; ++j) {
        k[j] = k_max * unit_uniform(rng);
        phase[j] = kTwoPi * unit_uniform(rng);
        amp[j] = 2.0 * unit_uniform(rng) - 1.0;
    }
    std::vector<double> f(grid.size(), 0.0);
    double peak = 0.0;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double x = grid.x(i);
        double s = 0.0;
        for (int j = 0; j < kModes; ++j) s += amp[j] * std::cos(k[j] * x + phase[j]);
        f[i] = s * std::exp(-0.5 * x * x / (envelope_width * envelope_width));
        peak = std::max(peak, std::abs(f[i]));
    }
    if (peak > 0.0) {
        for (auto& v : f) v /= peak;
    }
    return f;
}

// ---------------------------------------------------------------------------

StabilityReport stability_trial(StationaryWave wave, double q, const std::vector<double>& amplitudes,
                                double horizon, const ExperimentGrid& setup) {
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        if (!(amplitudes[i] >= 0.0)) throw InvalidArgument("stability_trial: amplitudes must be non-negative");
        if (i > 0 && !(amplitudes[i] > amplitudes[i - 1])) {
            throw InvalidArgument("stability_trial: amplitudes must be strictly increasing");
        }
    }
    const Grid1D grid = setup.grid();
    const FieldState base = stationary_wave(grid, wave, q);
    const auto params = ImpurityParams::sharp(q);
    const double dt = setup.time_step();

    const auto spectrum = eigen_bottom(assemble_linearized(base, q), 1);
    auto p1 = normalized_h1(grid, spectrum.eigenvectors.front());
    const auto n1 = normalized_h1(grid, band_limited_noise(grid, setup.seed));
    auto p2 = band_limited_noise(grid, setup.seed + 1);
    const double n2 = l2_norm(grid, p2);
    for (std::size_t i = 0; i < p1.size(); ++i) {
        p1[i] += 0.5 * n1[i];
        p2[i] *= 0.5 / n2;
    }
    const double direction_norm = pair_norm(grid, p1, p2);

    auto run = [&](std::size_t j) {
        StabilityEntry e;
        e.amplitude = amplitudes[j];
        const FieldState start = add_scaled(base, p1, p2, e.amplitude / direction_norm);
        EvolveOptions opts;
        opts.output_stride = setup.sample_stride;
        opts.store_states = false;
        opts.observer = [&](const FieldState& s) {
            const double d = deviation_norm(s, base).total;
            e.sup_deviation = std::max(e.sup_deviation, d);
            if (d >= kEscapeDeviation) e.escaped = true;
        };
        opts.stop_when = [&](const FieldState&) { return e.escaped; };
        const auto traj = evolve(start, params, horizon, dt, opts);
        e.ratio = e.amplitude > 0.0 ? e.sup_deviation / e.amplitude : 0.0;
        e.energy_drift = traj.max_relative_energy_drift();
        e.bound_ratio = traj.bound_ratio();
        return e;
    };

    StabilityReport r;
    r.wave = wave;
    r.q = q;
    r.horizon = horizon;
    r.seed = setup.seed;
    r.entries = parallel_map(amplitudes.size(), setup.threads, run);
    bool escaped = false;
    for (const auto& e : r.entries) {
        r.max_ratio = std::max(r.max_ratio, e.ratio);
        escaped = escaped || e.escaped;
    }
    r.stable = !escaped && r.max_ratio <= kStabilityConstant;
    return r;
}

InstabilityReport instability_trial(StationaryWave wave, double q, double seed_amplitude, double horizon,
                                    const ExperimentGrid& setup) {
    if (!(seed_amplitude >= 0.0)) throw InvalidArgument("instability_trial: seed amplitude must be >= 0");
    const Grid1D grid = setup.grid();
    const FieldState base = stationary_wave(grid, wave, q);
    const auto params = ImpurityParams::sharp(q);

    const auto spectrum = eigen_bottom(assemble_linearized(base, q), 1);
    InstabilityReport r;
    r.wave = wave;
    r.q = q;
    r.seed_amplitude = seed_amplitude;
    r.lambda1 = spectrum.eigenvalues.front();
    r.predicted_rate = spectrum.growth_rate;
    if (seed_amplitude == 0.0) {
        r.degenerate = true;
        return r;
    }

    // Unstable-manifold direction of the linearization: (v, sigma v).
    const auto& v = spectrum.eigenvectors.front();
    std::vector<double> p2(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) p2[i] = r.predicted_rate * v[i];
    const FieldState start = add_scaled(base, v, p2, seed_amplitude / pair_norm(grid, v, p2));

    EvolveOptions opts;
    opts.output_stride = setup.sample_stride;
    opts.store_states = false;
    opts.observer = [&](const FieldState& s) {
        const double d = deviation_norm(s, base).total;
        r.times.push_back(s.t);
        r.deviations.push_back(d);
        if (d >= kEscapeDeviation && !r.escape_time) r.escape_time = s.t;
    };
    opts.stop_when = [&](const FieldState&) { return r.escape_time.has_value(); };
    evolve(start, params, horizon, setup.time_step(), opts);

    const double ceiling = kLinearWindowFactor * seed_amplitude;
    const auto cross = std::find_if(r.deviations.begin(), r.deviations.end(),
                                    [ceiling](double d) { return d >= ceiling; });
    if (cross == r.deviations.end()) {
        throw NoGrowthDetected(fmt::format(
            "{} at q = {}: deviation stayed below {}x the seed over T = {} (max {})", to_string(wave), q,
            kLinearWindowFactor, horizon, *std::max_element(r.deviations.begin(), r.deviations.end())));
    }
    const auto window = static_cast<std::size_t>(cross - r.deviations.begin());
    if (window < 3) {
        throw NoGrowthDetected("instability_trial: linear window too short; reduce the sample stride");
    }
    std::vector<double> ts(r.times.begin(), r.times.begin() + static_cast<std::ptrdiff_t>(window));
    std::vector<double> logs(window);
    for (std::size_t i = 0; i < window; ++i) logs[i] = std::log(r.deviations[i]);
    r.fitted_rate = fit_slope(ts, logs);
    r.fit_start = ts.front();
    r.fit_end = ts.back();
    r.relative_mismatch = r.predicted_rate > 0.0
                              ? std::abs(r.fitted_rate - r.predicted_rate) / r.predicted_rate
                              : std::numeric_limits<double>::infinity();
    return r;
}

// ---------------------------------------------------------------------------

ScatterClass classify_scatter(double final_center, double mean_velocity) {
    if (final_center > kScatterThreshold && mean_velocity > 0.0) return ScatterClass::Transmit;
    if (final_center < -kScatterThreshold && mean_velocity < 0.0) return ScatterClass::Reflect;
    return ScatterClass::Capture;
}

std::vector<ScatterOutcome> scattering_sweep(double q, const std::vector<double>& speeds,
                                             const ScatterSetup& setup) {
    for (double v : speeds) {
        if (!(v > 0.0 && v < 1.0)) {
            throw SuperluminalSpeed(fmt::format("scattering speeds must lie in (0, 1), got {}", v));
        }
    }
    const Grid1D grid = Grid1D::make(setup.half_width, setup.nodes);
    const double dt = setup.dt > 0.0 ? setup.dt : default_time_step(grid);
    const auto params = ImpurityParams::sharp(q);

    auto run = [&](std::size_t j) {
        ScatterOutcome o;
        o.q = q;
        o.speed = speeds[j];
        o.horizon = kScatterTravel / o.speed;
        const FieldState start = boosted_kink_state(grid, o.speed, kScatterStart, 0.0);

        std::vector<double> ts, centers;
        EvolveOptions opts;
        const auto steps = static_cast<std::size_t>(o.horizon / dt);
        opts.output_stride = std::max<std::size_t>(1, steps / 800);
        opts.store_states = false;
        opts.observer = [&](const FieldState& s) {
            if (const auto c = kink_center(s)) {
                ts.push_back(s.t);
                centers.push_back(*c);
            }
        };
        const auto traj = evolve(start, params, o.horizon, dt, opts);

        std::vector<double> late_t, late_c;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (ts[i] >= 0.75 * o.horizon) {
                late_t.push_back(ts[i]);
                late_c.push_back(centers[i]);
            }
        }
        o.final_center = centers.empty() ? std::numeric_limits<double>::quiet_NaN() : centers.back();
        o.mean_velocity = late_t.size() >= 2 ? fit_slope(late_t, late_c) : 0.0;
        o.outcome = classify_scatter(o.final_center, o.mean_velocity);
        o.energy_drift = traj.max_relative_energy_drift();
        return o;
    };
    return parallel_map(speeds.size(), setup.threads, run);
}

// ---------------------------------------------------------------------------

double static_energy(const FieldState& profile, double q) {
    const auto& g = profile.grid;
    double pot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) pot += g.weight(i) * (1.0 - std::cos(profile.u1[i]));
    return 0.5 * cell_dirichlet_energy(g, profile.u1) + pot +
           q * (1.0 - std::cos(profile.u1[g.zero_index()]));
}

namespace {

// Nodal gradient of static_energy on interior nodes (ends are clamped).
void energy_gradient(const Grid1D& g, const std::vector<double>& u, double q, std::vector<double>& grad) {
    const double h = g.spacing();
    const std::size_t n = u.size();
    grad[0] = grad[n - 1] = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        grad[i] = -(u[i + 1] - 2.0 * u[i] + u[i - 1]) / h + h * std::sin(u[i]);
    }
    const std::size_t z = g.zero_index();
    grad[z] += q * std::sin(u[z]);
}

// static_energy(v) - static_energy(u), summed cell by cell without cancellation.
double energy_change(const Grid1D& g, const std::vector<double>& u, const std::vector<double>& v, double q) {
    const double h = g.spacing();
    double grad = 0.0, pot = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const double a = u[i + 1] - u[i], b = v[i + 1] - v[i];
        grad += (b - a) * (b + a);
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        pot += g.weight(i) * std::sin(0.5 * (u[i] + v[i])) * std::sin(0.5 * (v[i] - u[i]));
    }
    const std::size_t z = g.zero_index();
    return 0.5 * grad / h + 2.0 * pot + 2.0 * q * std::sin(0.5 * (u[z] + v[z])) * std::sin(0.5 * (v[z] - u[z]));
}

// Solves h(-D2 + 1) d = rhs on interior nodes with homogeneous Dirichlet ends.
void apply_preconditioner(const Grid1D& g, const std::vector<double>& rhs, std::vector<double>& d) {
    const double h = g.spacing();
    const std::size_t m = rhs.size() - 2;
    const double diag = 2.0 / h + h;
    const double off = -1.0 / h;
    std::vector<double> c(m), y(m);
    c[0] = off / diag;
    y[0] = rhs[1] / diag;
    for (std::size_t j = 1; j < m; ++j) {
        const double denom = diag - off * c[j - 1];
        c[j] = off / denom;
        y[j] = (rhs[j + 1] - off * y[j - 1]) / denom;
    }
    d.assign(rhs.size(), 0.0);
    d[m] = y[m - 1];
    for (std::size_t j = m - 1; j-- > 0;) d[j + 1] = y[j] - c[j] * d[j + 2];
}

}  // namespace

MinimizationReport minimize_energy(double q, Sector sector, const FieldState& initial,
                                   const MinimizeOptions& options) {
    initial.validate();
    const Grid1D& g = initial.grid;
    const std::size_t n = g.size();
    const std::size_t z = g.zero_index();
    const double h = g.spacing();
    if (sector == Sector::Degree1 &&
        (std::abs(initial.u1.front()) > 1e-6 || std::abs(initial.u1.back() - kTwoPi) > 1e-6)) {
        throw InvalidArgument("Degree1 sector needs clamped end values 0 and 2 pi");
    }

    MinimizationReport r;
    r.sector = sector;
    r.q = q;
    r.profile = FieldState::zeros(g);
    r.profile.u1 = initial.u1;

    auto& u = r.profile.u1;
    std::vector<double> grad(n), dir(n), trial(n);
    double e = static_energy(r.profile, q);
    r.energy_history.push_back(e);

    auto residuals = [&] {
        double interior = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (i != z) interior = std::max(interior, std::abs(grad[i] / h));
        }
        r.interior_residual = interior;
        r.gluing_residual = -grad[z];
    };

    bool converged = false;
    for (std::size_t it = 0; it < options.step_budget; ++it) {
        energy_gradient(g, u, q, grad);
        residuals();
        if (r.interior_residual <= options.residual_tolerance &&
            std::abs(r.gluing_residual) <= options.residual_tolerance) {
            converged = true;
            break;
        }
        apply_preconditioner(g, grad, dir);
        double slope = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) slope += grad[i] * dir[i];

        double alpha = 1.0;
        bool accepted = false;
        FieldState candidate = r.profile;
        while (alpha > 1e-14) {
            for (std::size_t i = 0; i < n; ++i) candidate.u1[i] = u[i] - alpha * dir[i];
            const double change = energy_change(g, u, candidate.u1, q);
            if (change <= -1e-4 * alpha * slope) {
                u.swap(candidate.u1);
                e += change;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;  // no further decrease representable
        r.energy_history.push_back(e);
        r.iterations = it + 1;
    }
    if (!converged) {
        energy_gradient(g, u, q, grad);
        residuals();
        converged = r.interior_residual <= options.residual_tolerance &&
                    std::abs(r.gluing_residual) <= options.residual_tolerance;
    }
    if (!converged) {
        throw NonConvergence(fmt::format(
            "gradient flow stopped after {} iterations with residuals {} (interior), {} (origin)",
            r.iterations, r.interior_residual, r.gluing_residual));
    }
    r.final_energy = static_energy(r.profile, q);

    std::vector<std::pair<std::string, FieldState>> candidates;
    if (sector == Sector::Degree1) {
        candidates.emplace_back("kink", kink_profile(g, 0.0));
    } else {
        candidates.emplace_back("zero", FieldState::zeros(g));
        if (std::abs(q) > 2.0) {
            candidates.emplace_back("ground_state", ground_state(g, q));
            candidates.emplace_back("-ground_state", negated(ground_state(g, q)));
        }
    }
    r.nearest_distance = std::numeric_limits<double>::infinity();
    for (const auto& [name, wave] : candidates) {
        const double d = deviation_norm(r.profile, wave).h1_part;
        if (d < r.nearest_distance) {
            r.nearest_distance = d;
            r.nearest_wave = name;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------

MollifiedConvergenceReport mollified_convergence(const FieldState& datum, double q,
                                                 const std::vector<double>& epsilons, double horizon,
                                                 double dt, unsigned threads) {
    datum.validate();
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
            throw InvalidArgument("mollified_convergence: epsilon list must be decreasing");
        }
        ImpurityParams::mollified(q, epsilons[i]).validate(datum.grid);
    }
    const double step = dt > 0.0 ? dt : default_time_step(datum.grid);

    EvolveOptions opts;
    opts.store_states = false;
    opts.output_stride = 1000;
    const auto sharp = evolve(datum, ImpurityParams::sharp(q), horizon, step, opts);

    auto run = [&](std::size_t j) {
        const auto moll = evolve(datum, ImpurityParams::mollified(q, epsilons[j]), horizon, step, opts);
        return MollifiedRow{epsilons[j], deviation_norm(moll.final_state, sharp.final_state).total};
    };

    MollifiedConvergenceReport r;
    r.q = q;
    r.horizon = horizon;
    r.rows = parallel_map(epsilons.size(), threads, run);

    const bool all_zero = std::all_of(r.rows.begin(), r.rows.end(),
                                      [](const MollifiedRow& row) { return row.deviation == 0.0; });
    bool decreasing = true;
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
        decreasing = decreasing && r.rows[i].deviation < r.rows[i - 1].deviation;
    }
    r.monotone = all_zero || decreasing;

    const bool positive = std::all_of(r.rows.begin(), r.rows.end(),
                                      [](const MollifiedRow& row) { return row.deviation > 0.0; });
    if (positive && r.rows.size() >= 2) {
        double sum = 0.0;
        for (std::size_t i = 1; i < r.rows.size(); ++i) {
            sum += std::log(r.rows[i - 1].deviation / r.rows[i].deviation) /
                   std::log(r.rows[i - 1].epsilon / r.rows[i].epsilon);
        }
        r.empirical_order = sum / static_cast<double>(r.rows.size() - 1);
    }
    return r;
}

}  // namespace sgd
