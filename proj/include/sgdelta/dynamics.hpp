#pragma once

// Explicit kick-drift-kick leapfrog for
//     d/dt u1 = u2,
//     d/dt u2 = u_xx - sin u1 - q delta_0 sin u1          (Sharp)
//     d/dt u2 = u_xx - sin u1 - q rho_eps sin(<rho_eps,u1>) (Mollified)
// with the ends clamped to their initial values.

#include <functional>
#include <optional>
#include <vector>

#include "sgdelta/core.hpp"
#include "sgdelta/mollifier.hpp"

namespace sgd {

/// LinearKleinGordon replaces sin by the identity in both the bulk and the
/// impurity term.
enum class Nonlinearity { SineGordon, LinearKleinGordon };

inline constexpr double kCflLimit = 0.9;          // dt <= 0.9 dx
inline constexpr double kBlowUpVelocity = 1e6;    // |u2| above this aborts

/// Precomputed right-hand side for one (grid, params, nonlinearity).
class ForceField {
public:
    ForceField(const Grid1D& grid, const ImpurityParams& params,
               Nonlinearity nonlinearity = Nonlinearity::SineGordon);

    const Grid1D& grid() const noexcept { return grid_; }
    const ImpurityParams& params() const noexcept { return params_; }
    const MollifierProfile* mollifier() const noexcept { return mollifier_ ? &*mollifier_ : nullptr; }

    /// acc = u_xx - f(u) - impurity force on interior nodes; zero at the ends.
    void acceleration(std::span<const double> u1, std::span<double> acc) const;

    EnergyBreakdown energy(const FieldState& state) const;

private:
    Grid1D grid_;
    ImpurityParams params_;
    Nonlinearity nonlinearity_;
    std::optional<MollifierProfile> mollifier_;
};

/// One leapfrog step. dt may be negative (exact time reversal up to round-off).
/// Throws CflViolation when |dt| > 0.9 dx.
FieldState step(const FieldState& state, const ImpurityParams& params, double dt,
                Nonlinearity nonlinearity = Nonlinearity::SineGordon);

struct Trajectory {
    std::vector<double> times;
    std::vector<FieldState> states;            // empty when store_states is off
    std::vector<EnergyBreakdown> energies;
    /// ||sin u1||_2 + ||u2||_2 + ||u1_x||_2 at each output time.
    std::vector<double> bound_series;
    double dt = 0.0;
    double dx = 0.0;
    ImpurityParams params;
    double wall_clock_seconds = 0.0;
    FieldState final_state;
    bool stopped_early = false;  // EvolveOptions::stop_when fired

    /// max_t |E(t) - E(0)| / max(|E(0)|, 1).
    double max_relative_energy_drift() const;
    double bound_ratio() const;  // sup_t bound / bound(0)
};

struct EvolveOptions {
    std::size_t output_stride = 100;  // steps between outputs
    bool store_states = true;
    Nonlinearity nonlinearity = Nonlinearity::SineGordon;
    /// Called at every output time (including t0 and the final time).
    std::function<void(const FieldState&)> observer;
    /// Checked at every output time after the observer; true ends the run.
    std::function<bool(const FieldState&)> stop_when;
};

/// Integrates over a horizon T > 0 with fixed step dt (negative dt runs
/// backwards). The final step is shortened to land exactly on T when T is
/// not a multiple of |dt|. Throws BlowUp with the time of failure.
Trajectory evolve(const FieldState& initial, const ImpurityParams& params, double horizon,
                  double dt, const EvolveOptions& options = {});

/// Default time step dx / 2.
inline double default_time_step(const Grid1D& grid) { return 0.5 * grid.spacing(); }

// ---------------------------------------------------------------------------
// Linear Klein-Gordon oracle: u_tt - u_xx + u = 0 solved by quadrature of
//     u(t) = d/dt (G(t) * u1_0) + G(t) * u2_0,  G(x,t) = 1/2 H(t-|x|) J0(sqrt(t^2-x^2)).

struct LinearDatum {
    std::function<double(double)> u1;
    std::function<double(double)> u2;
    double support_radius = 0.0;  // datum vanishes (numerically) outside [-r, r]
};

/// Reference solution for a continuous datum, sampled on `grid`.
/// Throws LightConeExit when support_radius + t reaches the domain edge.
FieldState linear_kg_reference(const Grid1D& grid, const LinearDatum& datum, double t);

/// Reference solution for a sampled datum (4-point Lagrange interpolation
/// between nodes). The support is taken as the nodes where |u| > 1e-12.
FieldState linear_kg_reference(const FieldState& initial, double t);

}  // namespace sgd
