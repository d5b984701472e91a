#pragma once

// Numerical experiments built on the core/waves/dynamics/spectrum modules:
// perturbation trials around stationary waves, kink-impurity scattering,
// discrete gradient-flow minimization and the mollifier limit.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgdelta/core.hpp"
#include "sgdelta/dynamics.hpp"

namespace sgd {

enum class StationaryWave { Kink, GroundState };

std::string to_string(StationaryWave wave);

/// Samples the centered kink or the ground state for coupling q.
FieldState stationary_wave(const Grid1D& grid, StationaryWave wave, double q);

// Declared constants of the trial protocols.
inline constexpr double kStabilityConstant = 10.0;  // acceptance bound on C_measured
inline constexpr double kEscapeDeviation = 0.1;     // H^1 x L^2 deviation counted as escape
inline constexpr double kLinearWindowFactor = 10.0; // fit window ends at 10x the seed

/// Shared numerical setup of trials and sweeps.
struct ExperimentGrid {
    double half_width = 20.0;
    std::size_t nodes = 4001;
    double dt = 0.0;              // 0 selects dx / 2
    std::size_t sample_stride = 10;  // steps between deviation samples
    std::uint64_t seed = 0;
    unsigned threads = 1;

    Grid1D grid() const { return Grid1D::make(half_width, nodes); }
    double time_step() const;
};

/// Smooth random field: a few Fourier modes with |k| <= k_max under a
/// Gaussian envelope, reproducible from `seed` on every platform.
std::vector<double> band_limited_noise(const Grid1D& grid, std::uint64_t seed, double k_max = 2.0,
                                       double envelope_width = 4.0);

// ---------------------------------------------------------------------------

struct StabilityEntry {
    double amplitude = 0.0;        // initial H^1 x L^2 deviation
    double sup_deviation = 0.0;    // sup over sampled t in [0, T]
    double ratio = 0.0;            // sup_deviation / amplitude (0 for amplitude 0)
    bool escaped = false;
    double energy_drift = 0.0;
    double bound_ratio = 1.0;
};

struct StabilityReport {
    StationaryWave wave = StationaryWave::Kink;
    double q = 0.0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::vector<StabilityEntry> entries;  // by increasing amplitude
    double max_ratio = 0.0;
    bool stable = false;                  // max_ratio <= kStabilityConstant and no escape
};

/// Perturbs (wave, 0) along the bottom eigenvector of L_K plus seeded
/// band-limited noise, scaled to each amplitude, and records the sup of the
/// deviation over [0, T]. Amplitudes must be non-negative and increasing.
StabilityReport stability_trial(StationaryWave wave, double q, const std::vector<double>& amplitudes,
                                double horizon, const ExperimentGrid& setup = {});

struct InstabilityReport {
    StationaryWave wave = StationaryWave::Kink;
    double q = 0.0;
    double seed_amplitude = 0.0;
    double predicted_rate = 0.0;    // sqrt(-lambda_1) from the spectrum
    double lambda1 = 0.0;
    double fitted_rate = 0.0;
    double relative_mismatch = 0.0; // |fitted - predicted| / predicted
    double fit_start = 0.0;
    double fit_end = 0.0;
    std::optional<double> escape_time;
    bool degenerate = false;        // zero seed: nothing to measure
    std::vector<double> times;      // deviation samples
    std::vector<double> deviations;
};

/// Seeds the unstable manifold direction (v, sigma v) of the bottom
/// eigenvector (or (v, 0) when sigma = 0), fits log-deviation over the linear
/// window and follows the run until escape or T.
/// Throws NoGrowthDetected when the deviation never reaches 10x the seed.
InstabilityReport instability_trial(StationaryWave wave, double q, double seed_amplitude, double horizon,
                                    const ExperimentGrid& setup = {});

// ---------------------------------------------------------------------------

enum class ScatterClass { Transmit, Reflect, Capture };
std::string to_string(ScatterClass c);

inline constexpr double kScatterStart = -10.0;   // initial kink center
inline constexpr double kScatterThreshold = 5.0; // |center| beyond which a kink has left
inline constexpr double kScatterTravel = 20.0;   // horizon T(v) = travel / v

struct ScatterOutcome {
    double q = 0.0;
    double speed = 0.0;
    double horizon = 0.0;
    double final_center = 0.0;
    double mean_velocity = 0.0;  // least-squares slope over the last quarter of the run
    ScatterClass outcome = ScatterClass::Capture;
    double energy_drift = 0.0;   // max_t |E(t) - E(0)| / max(|E(0)|, 1)
};

struct ScatterSetup {
    double half_width = 40.0;
    std::size_t nodes = 8001;
    double dt = 0.0;  // 0 selects dx / 2
    unsigned threads = 1;
};

ScatterClass classify_scatter(double final_center, double mean_velocity);

/// Boosted kink from x = -10 toward the impurity for each speed, observed
/// until T(v) = 20 / v. Results are ordered by speed as given.
std::vector<ScatterOutcome> scattering_sweep(double q, const std::vector<double>& speeds,
                                             const ScatterSetup& setup = {});

// ---------------------------------------------------------------------------

enum class Sector { FreeH1, Degree1 };
std::string to_string(Sector s);

struct MinimizeOptions {
    std::size_t step_budget = 20000;
    double residual_tolerance = 1e-7;  // max-norm strong-form residual at convergence
};

struct MinimizationReport {
    Sector sector = Sector::FreeH1;
    double q = 0.0;
    double final_energy = 0.0;
    std::string nearest_wave;     // "zero", "ground_state", "-ground_state", "kink"
    double nearest_distance = 0.0;
    std::size_t iterations = 0;
    double interior_residual = 0.0;  // max |-u_xx + sin u| over interior nodes off the origin
    double gluing_residual = 0.0;    // scheme-consistent zero-node residual
    std::vector<double> energy_history;
    FieldState profile;
};

/// Discrete energy E(u, 0) of a profile with the sharp impurity, the
/// functional the gradient flow descends.
double static_energy(const FieldState& profile, double q);

/// Preconditioned gradient flow ((-d_xx + 1)^{-1} metric, Armijo steps) on the
/// discrete static energy. The end values of `initial` stay clamped; in the
/// Degree1 sector they must be 0 and 2 pi. Throws NonConvergence when the
/// budget runs out first.
MinimizationReport minimize_energy(double q, Sector sector, const FieldState& initial,
                                   const MinimizeOptions& options = {});

// ---------------------------------------------------------------------------

struct MollifiedRow {
    double epsilon = 0.0;
    double deviation = 0.0;  // ||mollified(T) - sharp(T)||_{H^1 x L^2}
};

struct MollifiedConvergenceReport {
    double q = 0.0;
    double horizon = 0.0;
    std::vector<MollifiedRow> rows;  // in the order of the epsilon list
    bool monotone = false;           // deviations strictly decreasing (or all zero)
    std::optional<double> empirical_order;  // mean log2 ratio over consecutive halvings
};

MollifiedConvergenceReport mollified_convergence(const FieldState& datum, double q,
                                                 const std::vector<double>& epsilons, double horizon,
                                                 double dt = 0.0, unsigned threads = 1);

}  // namespace sgd
