#include "sgdelta/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>

#include <fmt/format.h>

#include "sgdelta/error.hpp"
#include "sgdelta/experiments.hpp"
#include "sgdelta/spectrum.hpp"
#include "sgdelta/waves.hpp"

namespace sgd {

namespace {

// Grids.
constexpr double kSpectralHalfWidth = 40.0;
constexpr std::size_t kSpectralNodes = 8001;
constexpr double kFineHalfWidth = 20.0;
constexpr std::size_t kFineNodes = 40001;  // dx = 1e-3 for the closed-form energies

// Tolerances.
constexpr double kBoundStateTol = 1e-3;
constexpr double kExactGluingTol = 1e-10;
constexpr double kClosedEnergyTol = 1e-6;
constexpr double kStationaryDeviationTol = 1e-3;
constexpr double kEnergyDriftTol = 1e-4;
constexpr double kBoundRatioMax = 3.0;
constexpr double kZeroModeMatchTol = 1e-3;
constexpr double kGrowthMismatchTol = 0.10;
constexpr double kZeroEnergyTol = 1e-6;
constexpr double kMinimumEnergyTol = 1e-4;
constexpr double kEulerLagrangeTol = 1e-6;
constexpr double kOrderRatioLow = 3.0;
constexpr double kOrderRatioHigh = 5.0;
constexpr double kExitSpeedTol = 1e-2;
constexpr double kScatterDriftTol = 1e-3;

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool passed = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        passed = passed && ok;
        if (!detail.empty()) detail += "; ";
        detail += what;
        if (!ok) detail += " [FAIL]";
    }
};

SpectralReport spectrum_of(const FieldState& background, double q, std::size_t k) {
    return eigen_bottom(assemble_linearized(background, q), k);
}

Grid1D spectral_grid() { return Grid1D::make(kSpectralHalfWidth, kSpectralNodes); }

Outcome zero_background_bound_states() {
    Outcome o;
    const auto g = spectral_grid();
    const auto zero = FieldState::zeros(g);
    for (double q : {-1.0, -1.5}) {
        const double expected = 1.0 - 0.25 * q * q;
        const auto r = spectrum_of(zero, q, 3);
        const auto below = std::count_if(r.eigenvalues.begin(), r.eigenvalues.end(), [](double l) { return l < 1.0; });
        o.check(std::abs(r.eigenvalues[0] - expected) <= kBoundStateTol && below == 1,
                fmt::format("q={} lambda1={:.6f} (expect {:.4f}), below 1: {}", q, r.eigenvalues[0], expected, below));
    }
    return o;
}

Outcome ground_state_existence() {
    Outcome o;
    const auto g = Grid1D::make(20.0, 4001);
    for (double q : {-2.0, -1.0, 0.5, 2.0}) {
        bool rejected = false;
        try {
            (void)ground_state(g, q);
        } catch (const NoH1Wave&) {
            rejected = true;
        }
        o.check(rejected, fmt::format("q={} rejected={}", q, rejected));
    }
    for (double q : {-4.0, -2.1, 2.1, 6.0}) {
        const auto u = ground_state(g, q);
        const double r = gluing_residual_exact(GroundState{q}, q);
        o.check(std::abs(r) <= kExactGluingTol && u.u1[g.zero_index()] > 0.0,
                fmt::format("q={} residual={:.2e}", q, r));
    }
    return o;
}

Outcome closed_form_energies() {
    Outcome o;
    const auto g = Grid1D::make(kFineHalfWidth, kFineNodes);
    const auto kink = kink_profile(g, 0.0);
    for (double q : {-1.0, 1.0}) {
        const double e = energy(kink, ImpurityParams::sharp(q)).total;
        o.check(std::abs(e - (8.0 + 2.0 * q)) <= kClosedEnergyTol, fmt::format("E(K) q={} = {:.9f}", q, e));
    }
    const double eq = energy(ground_state(g, -4.0), ImpurityParams::sharp(-4.0)).total;
    o.check(std::abs(eq + 2.0) <= kClosedEnergyTol, fmt::format("E(Q) q=-4 = {:.9f}", eq));
    return o;
}

Outcome stationarity() {
    Outcome o;
    const auto g = Grid1D::make(20.0, 4001);
    constexpr double dt = 0.005;
    constexpr double horizon = 50.0;
    const std::pair<StationaryWave, double> cases[] = {{StationaryWave::GroundState, -4.0},
                                                       {StationaryWave::Kink, -1.0}};
    for (const auto& [wave, q] : cases) {
        const auto start = stationary_wave(g, wave, q);
        double sup = 0.0;
        EvolveOptions opt;
        opt.store_states = false;
        opt.output_stride = 100;
        opt.observer = [&](const FieldState& s) { sup = std::max(sup, deviation_norm(s, start).total); };
        const auto tr = evolve(start, ImpurityParams::sharp(q), horizon, dt, opt);
        const double drift = tr.max_relative_energy_drift();
        const double bound = tr.bound_ratio();
        o.check(sup <= kStationaryDeviationTol && drift <= kEnergyDriftTol && bound <= kBoundRatioMax,
                fmt::format("{} q={}: sup dev {:.2e}, drift {:.2e}, bound ratio {:.4f}", to_string(wave), q, sup, drift,
                            bound));
    }
    return o;
}

struct SpectralCase {
    StationaryWave wave;
    double q;
};

Outcome spectral_dichotomy() {
    Outcome o;
    const auto g = spectral_grid();
    const SpectralCase unstable[] = {{StationaryWave::Kink, 1.0}, {StationaryWave::Kink, 4.0},
                                     {StationaryWave::GroundState, 4.0}};
    const SpectralCase stable[] = {{StationaryWave::Kink, -1.0}, {StationaryWave::GroundState, -4.0}};
    for (const auto& c : unstable) {
        const auto r = spectrum_of(stationary_wave(g, c.wave, c.q), c.q, 3);
        o.check(r.morse_index == 1,
                fmt::format("{} q={}: morse {} lambda1 {:.5f}", to_string(c.wave), c.q, r.morse_index, r.eigenvalues[0]));
    }
    for (const auto& c : stable) {
        const auto r = spectrum_of(stationary_wave(g, c.wave, c.q), c.q, 3);
        o.check(r.morse_index == 0 && r.eigenvalues[0] > 0.0,
                fmt::format("{} q={}: morse {} lambda1 {:.5f}", to_string(c.wave), c.q, r.morse_index, r.eigenvalues[0]));
    }
    return o;
}

Outcome kernel_triviality() {
    Outcome o;
    const auto g = spectral_grid();
    const SpectralCase cases[] = {{StationaryWave::Kink, 1.0},
                                  {StationaryWave::Kink, -1.0},
                                  {StationaryWave::GroundState, 4.0},
                                  {StationaryWave::GroundState, -4.0}};
    for (const auto& c : cases) {
        const auto r = spectrum_of(stationary_wave(g, c.wave, c.q), c.q, 4);
        double closest = INFINITY;
        for (double l : r.eigenvalues) closest = std::min(closest, std::abs(l));
        o.check(!r.has_zero_mode && closest > r.tol_zero,
                fmt::format("{} q={}: min |lambda| {:.4e} vs tol {:.1e}", to_string(c.wave), c.q, closest, r.tol_zero));
    }

    const auto kink = kink_profile(g, 0.0);
    const auto r = spectrum_of(kink, 0.0, 2);
    std::vector<double> kx(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) kx[i] = 2.0 / std::cosh(g.x(i));
    kx.front() = kx.back() = 0.0;
    const double n = l2_norm(g, kx);
    for (auto& v : kx) v /= n;
    std::vector<double> diff(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) diff[i] = r.eigenvectors[0][i] - kx[i];
    const double mismatch = l2_norm(g, diff);
    o.check(r.has_zero_mode && mismatch <= kZeroModeMatchTol,
            fmt::format("kink q=0: lambda1 {:.2e}, zero mode {}, |v - K_x| {:.2e}", r.eigenvalues[0], r.has_zero_mode,
                        mismatch));
    return o;
}

Outcome growth_rate_consistency() {
    Outcome o;
    const auto r = instability_trial(StationaryWave::Kink, 1.0, 1e-4, 30.0);
    o.check(r.relative_mismatch <= kGrowthMismatchTol,
            fmt::format("fitted {:.5f} predicted {:.5f} mismatch {:.2f}%", r.fitted_rate, r.predicted_rate,
                        100.0 * r.relative_mismatch));
    return o;
}

Outcome nonlinear_stability(unsigned threads) {
    Outcome o;
    ExperimentGrid setup;
    setup.threads = threads;
    const SpectralCase cases[] = {{StationaryWave::Kink, -1.0}, {StationaryWave::GroundState, -4.0}};
    for (const auto& c : cases) {
        const auto r = stability_trial(c.wave, c.q, {1e-3, 1e-2}, 200.0, setup);
        for (const auto& e : r.entries) {
            o.check(e.ratio <= kStabilityConstant && !e.escaped && e.energy_drift <= kEnergyDriftTol &&
                        e.bound_ratio <= kBoundRatioMax,
                    fmt::format("{} q={} amp {:g}: C {:.4f}, escaped {}, drift {:.1e}", to_string(c.wave), c.q,
                                e.amplitude, e.ratio, e.escaped, e.energy_drift));
        }
    }
    return o;
}

Outcome minimization() {
    Outcome o;
    const auto g = Grid1D::make(20.0, 4001);
    auto describe = [](const MinimizationReport& m) {
        return fmt::format("{} q={}: E {:.8f} -> {} (res {:.1e}/{:.1e}, {} it)", to_string(m.sector), m.q,
                           m.final_energy, m.nearest_wave, m.interior_residual, m.gluing_residual, m.iterations);
    };
    auto residual_ok = [](const MinimizationReport& m) {
        return m.interior_residual <= kEulerLagrangeTol && std::abs(m.gluing_residual) <= kEulerLagrangeTol;
    };

    FieldState small = FieldState::zeros(g);
    small.u1 = band_limited_noise(g, 0);
    for (auto& v : small.u1) v *= 0.1;
    const auto m1 = minimize_energy(-1.0, Sector::FreeH1, small);
    o.check(std::abs(m1.final_energy) <= kZeroEnergyTol && m1.nearest_wave == "zero" && residual_ok(m1), describe(m1));

    FieldState q09 = ground_state(g, -4.0);
    for (auto& v : q09.u1) v *= 0.9;
    const auto m2 = minimize_energy(-4.0, Sector::FreeH1, q09);
    o.check(std::abs(m2.final_energy + 2.0) <= kMinimumEnergyTol && m2.nearest_wave == "ground_state" &&
                residual_ok(m2),
            describe(m2));

    const auto m3 = minimize_energy(-1.0, Sector::Degree1, kink_profile(g, 1.0));
    o.check(std::abs(m3.final_energy - 6.0) <= kMinimumEnergyTol && m3.nearest_wave == "kink" && residual_ok(m3),
            describe(m3));
    return o;
}

Outcome linear_oracle() {
    Outcome o;
    const LinearDatum datum{[](double) { return 0.0; }, [](double x) { return std::exp(-4.0 * x * x); }, 4.0};
    double errors[2] = {};
    const std::size_t nodes[2] = {401, 801};
    for (int k = 0; k < 2; ++k) {
        const auto g = Grid1D::make(10.0, nodes[k]);
        auto s = FieldState::zeros(g);
        for (std::size_t i = 0; i < g.size(); ++i) s.u2[i] = datum.u2(g.x(i));
        EvolveOptions opt;
        opt.store_states = false;
        opt.nonlinearity = Nonlinearity::LinearKleinGordon;
        const auto tr = evolve(s, ImpurityParams::sharp(0.0), 1.0, default_time_step(g), opt);
        errors[k] = deviation_norm(tr.final_state, linear_kg_reference(g, datum, 1.0)).total;
    }
    const double ratio = errors[0] / errors[1];
    o.check(ratio >= kOrderRatioLow && ratio <= kOrderRatioHigh,
            fmt::format("errors {:.3e} -> {:.3e}, ratio {:.3f}", errors[0], errors[1], ratio));
    return o;
}

Outcome mollified_limit(unsigned threads) {
    Outcome o;
    const auto g = Grid1D::make(20.0, 4001);
    const auto r = mollified_convergence(ground_state(g, -4.0), -4.0, {0.4, 0.2, 0.1, 0.05}, 10.0, 0.0, threads);
    std::string rows;
    for (const auto& row : r.rows) rows += fmt::format(" {:g}:{:.4f}", row.epsilon, row.deviation);
    o.check(r.monotone, fmt::format("deviations{}", rows));
    return o;
}

Outcome scattering(unsigned threads) {
    Outcome o;
    const std::vector<double> speeds = {0.05, 0.1, 0.3, 0.5, 0.8};
    ScatterSetup coarse;
    coarse.threads = threads;
    ScatterSetup fine = coarse;
    fine.nodes = 2 * coarse.nodes - 1;

    for (const auto& s : scattering_sweep(0.0, speeds, coarse)) {
        o.check(s.outcome == ScatterClass::Transmit && std::abs(s.mean_velocity - s.speed) <= kExitSpeedTol &&
                    s.energy_drift <= kScatterDriftTol,
                fmt::format("q=0 v={:g}: {} exit {:.4f}", s.speed, to_string(s.outcome), s.mean_velocity));
    }
    const auto a = scattering_sweep(-0.5, speeds, coarse);
    const auto b = scattering_sweep(-0.5, speeds, fine);
    for (std::size_t i = 0; i < speeds.size(); ++i) {
        bool ok = a[i].outcome == b[i].outcome && a[i].energy_drift <= kScatterDriftTol &&
                  b[i].energy_drift <= kScatterDriftTol;
        if (speeds[i] == 0.05) ok = ok && a[i].outcome == ScatterClass::Capture;
        if (speeds[i] == 0.8) ok = ok && a[i].outcome == ScatterClass::Transmit;
        o.check(ok, fmt::format("q=-0.5 v={:g}: {} / {} at dx/2", speeds[i], to_string(a[i].outcome),
                                to_string(b[i].outcome)));
    }
    return o;
}

const char* criterion_name(int id) {
    switch (id) {
        case 1: return "zero-background bound states";
        case 2: return "ground-state existence boundary";
        case 3: return "closed-form energies";
        case 4: return "stationarity under evolution";
        case 5: return "spectral dichotomy";
        case 6: return "kernel triviality";
        case 7: return "growth-rate consistency";
        case 8: return "nonlinear stability";
        case 9: return "minimization";
        case 10: return "linear Klein-Gordon oracle";
        case 11: return "mollified convergence";
        case 12: return "scattering sanity";
        default: return "unknown";
    }
}

Outcome dispatch(int id, unsigned threads) {
    switch (id) {
        case 1: return zero_background_bound_states();
        case 2: return ground_state_existence();
        case 3: return closed_form_energies();
        case 4: return stationarity();
        case 5: return spectral_dichotomy();
        case 6: return kernel_triviality();
        case 7: return growth_rate_consistency();
        case 8: return nonlinear_stability(threads);
        case 9: return minimization();
        case 10: return linear_oracle();
        case 11: return mollified_limit(threads);
        case 12: return scattering(threads);
        default: throw InvalidArgument(fmt::format("no acceptance criterion {}", id));
    }
}

}  // namespace

CriterionResult run_criterion(int id, unsigned threads) {
    CriterionResult result;
    result.id = id;
    result.name = criterion_name(id);
    const auto t0 = Clock::now();
    try {
        auto o = dispatch(id, threads);
        result.passed = o.passed;
        result.detail = std::move(o.detail);
    } catch (const Error& e) {
        if (id < 1 || id > kCriterionCount) throw;
        result.passed = false;
        result.detail = fmt::format("{}: {}", e.kind(), e.what());
    }
    result.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return result;
}

std::vector<CriterionResult> run_acceptance(unsigned threads,
                                            const std::function<void(const CriterionResult&)>& progress) {
    std::vector<CriterionResult> out;
    for (int id = 1; id <= kCriterionCount; ++id) {
        out.push_back(run_criterion(id, threads));
        if (progress) progress(out.back());
    }
    return out;
}

}  // namespace sgd
