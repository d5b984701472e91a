#pragma once

// Grids, field states, energy-space norms and the conserved energy of
//     u_tt - u_xx + (1 + q delta_0(x)) sin u = 0.

#include <cstddef>
#include <span>
#include <vector>

namespace sgd {

/// Uniform mesh on [-L, L] with an odd node count, so that x = 0 is a node.
/// Node i sits at (i - zero_index) * dx, which makes the mesh exactly
/// symmetric about the origin.
class Grid1D {
public:
    /// Minimal 3-node grid on [-1, 1].
    Grid1D() : Grid1D(1.0, 3) {}

    /// Throws InvalidGrid for even N, N < 3 or non-positive L.
    static Grid1D make(double half_width, std::size_t node_count);

    double half_width() const noexcept { return half_width_; }
    std::size_t size() const noexcept { return node_count_; }
    double spacing() const noexcept { return spacing_; }
    std::size_t zero_index() const noexcept { return zero_index_; }

    double x(std::size_t i) const noexcept {
        return (static_cast<double>(i) - static_cast<double>(zero_index_)) * spacing_;
    }
    std::vector<double> nodes() const;

    /// Composite trapezoid weight of node i.
    double weight(std::size_t i) const noexcept {
        return (i == 0 || i + 1 == node_count_) ? 0.5 * spacing_ : spacing_;
    }

    friend bool operator==(const Grid1D&, const Grid1D&) = default;

private:
    Grid1D(double half_width, std::size_t node_count);

    double half_width_{};
    std::size_t node_count_{};
    double spacing_{};
    std::size_t zero_index_{};
};

/// Sampled pair (u1, u2) = (u, u_t) at time t.
struct FieldState {
    Grid1D grid;
    std::vector<double> u1;
    std::vector<double> u2;
    double t = 0.0;

    static FieldState zeros(const Grid1D& grid, double t = 0.0);

    /// Throws InvalidArgument if the sample counts disagree with the grid or
    /// an entry is non-finite.
    void validate() const;
};

enum class DeltaMode { Sharp, Mollified };

/// How the mollified impurity couples to the field:
///   Paired:    q rho(x) sin(<rho, u>)        (default)
///   Pointwise: q rho(x) sin(u(x))
enum class MollifiedCoupling { Paired, Pointwise };

struct ImpurityParams {
    double q = 0.0;
    DeltaMode mode = DeltaMode::Sharp;
    double epsilon = 0.0;  // mollifier half-width, Mollified mode only
    MollifiedCoupling coupling = MollifiedCoupling::Paired;

    static ImpurityParams sharp(double q) { return {q, DeltaMode::Sharp, 0.0, MollifiedCoupling::Paired}; }
    static ImpurityParams mollified(double q, double epsilon,
                                    MollifiedCoupling coupling = MollifiedCoupling::Paired) {
        return {q, DeltaMode::Mollified, epsilon, coupling};
    }

    /// Throws InvalidArgument / UnresolvedMollifier when incompatible with grid.
    void validate(const Grid1D& grid) const;
};

struct EnergyBreakdown {
    double kinetic = 0.0;
    double gradient = 0.0;
    double potential = 0.0;
    double delta_term = 0.0;
    double total = 0.0;
};

/// Seminorm pair describing the H^1_sin structure: (||u_x||_2, ||sin(u/2)||_2).
struct SinSeminorms {
    double gradient_l2 = 0.0;
    double sin_half_l2 = 0.0;
};

struct DeviationNorm {
    double h1_part = 0.0;
    double l2_part = 0.0;
    double total = 0.0;
};

class MollifierProfile;

// ---------------------------------------------------------------------------
// Discrete calculus. All quadratures are composite trapezoid on the grid.

double integrate(const Grid1D& grid, std::span<const double> f);
double l2_norm(const Grid1D& grid, std::span<const double> f);

/// Centered differences in the interior, second-order one-sided at the ends.
std::vector<double> centered_gradient(const Grid1D& grid, std::span<const double> f);

/// (u_{i+1} - u_i)^2 / dx summed over cells: the exact discrete Dirichlet
/// energy whose gradient is the three-point Laplacian.
double cell_dirichlet_energy(const Grid1D& grid, std::span<const double> f);

/// ||f||_{H^1}^2 with the centered gradient.
double h1_norm_squared(const Grid1D& grid, std::span<const double> f);

DeviationNorm deviation_norm(const FieldState& state, const FieldState& reference);

/// Throws UnresolvedMollifier when params are Mollified and not resolved by
/// the grid. The overload taking a profile reuses a precomputed mollifier.
EnergyBreakdown energy(const FieldState& state, const ImpurityParams& params);
EnergyBreakdown energy(const FieldState& state, const ImpurityParams& params,
                       const MollifierProfile* mollifier);

SinSeminorms sin_seminorms(const FieldState& state);

/// Both sides of the discrete interpolation inequality
///     2 max|f|^2 <= a ||f||^2 + (1/a) ||f_x||^2,
/// with the discretization allowance tolerance = 10 dx ||f||_{H^1}^2.
struct GagliardoCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double tolerance = 0.0;
    bool holds() const noexcept { return lhs <= rhs + tolerance; }
};
GagliardoCheck gagliardo_check(const Grid1D& grid, std::span<const double> f, double a);

}  // namespace sgd
