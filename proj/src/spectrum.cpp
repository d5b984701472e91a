#include "sgdelta/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sgdelta/error.hpp"

namespace sgd {

LinearizedOperator assemble_linearized(const FieldState& background, double q) {
    background.validate();
    const auto& g = background.grid;
    const std::size_t n = g.size();
    const std::size_t z = g.zero_index();
    const double h = g.spacing();

    LinearizedOperator op;
    op.grid_ = g;
    op.q_ = q;
    op.background_ = background.u1;
    op.interface_ = q * std::cos(background.u1[z]);

    double max_cos = 0.0;
    op.diag_.resize(n - 2);
    op.off_.assign(n - 3, -1.0 / (h * h));
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double c = std::cos(background.u1[i]);
        max_cos = std::max(max_cos, std::abs(c));
        op.diag_[i - 1] = 2.0 / (h * h) + c;
    }
    op.diag_[z - 1] += op.interface_ / h;
    op.potential_scale_ = std::max(1.0, max_cos + std::abs(op.interface_));
    return op;
}

std::vector<double> LinearizedOperator::apply(std::span<const double> v) const {
    const std::size_t n = grid_.size();
    if (v.size() != n) throw GridMismatch("LinearizedOperator::apply: sample count mismatch");
    std::vector<double> out(n, 0.0);
    const std::size_t m = diag_.size();
    for (std::size_t j = 0; j < m; ++j) {
        double s = diag_[j] * v[j + 1];
        if (j > 0) s += off_[j - 1] * v[j];
        if (j + 1 < m) s += off_[j] * v[j + 2];
        out[j + 1] = s;
    }
    return out;
}

double zero_tolerance(const LinearizedOperator& op) {
    const double h = op.grid().spacing();
    return 10.0 * h * h * op.potential_scale();
}

namespace {

// Number of eigenvalues strictly below x (Sturm sequence / LDL^T inertia).
std::size_t count_below(std::span<const double> a, std::span<const double> b, double x, double pivmin) {
    std::size_t count = 0;
    double d = a[0] - x;
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0.0) ++count;
    for (std::size_t j = 1; j < a.size(); ++j) {
        d = a[j] - x - b[j - 1] * b[j - 1] / d;
        if (std::abs(d) < pivmin) d = -pivmin;
        if (d < 0.0) ++count;
    }
    return count;
}

// Tridiagonal LU with partial pivoting (row interchanges), then solve in place.
void shifted_solve(std::span<const double> a, std::span<const double> b, double shift,
                   std::vector<double>& rhs) {
    const std::size_t m = a.size();
    std::vector<double> d(a.begin(), a.end()), dl(b.begin(), b.end()), du(b.begin(), b.end());
    std::vector<double> du2(m > 2 ? m - 2 : 0, 0.0);
    std::vector<bool> swapped(m, false);
    for (auto& v : d) v -= shift;
    const double tiny = std::numeric_limits<double>::epsilon() *
                        std::max(1.0, std::abs(shift) + 4.0 * std::abs(b.empty() ? 0.0 : b[0]));

    for (std::size_t i = 0; i + 1 < m; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0) d[i] = tiny;
            const double fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
        } else {
            const double fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            const double temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if (i + 2 < m) {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            swapped[i] = true;
        }
    }
    if (d[m - 1] == 0.0) d[m - 1] = tiny;

    for (std::size_t i = 0; i + 1 < m; ++i) {
        if (swapped[i]) std::swap(rhs[i], rhs[i + 1]);
        rhs[i + 1] -= dl[i] * rhs[i];
    }
    rhs[m - 1] /= d[m - 1];
    if (m >= 2) rhs[m - 2] = (rhs[m - 2] - du[m - 2] * rhs[m - 1]) / d[m - 2];
    for (std::size_t i = m - 2; i-- > 0;) {
        rhs[i] = (rhs[i] - du[i] * rhs[i + 1] - du2[i] * rhs[i + 2]) / d[i];
    }
}

double bisect_eigenvalue(std::span<const double> a, std::span<const double> b, std::size_t index,
                         double lo, double hi, double pivmin) {
    // Smallest x with count_below(x) > index, i.e. the (index+1)-th eigenvalue.
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (count_below(a, b, mid, pivmin) > index) {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) {
            break;
        }
    }
    return 0.5 * (lo + hi);
}

struct Eigenpair {
    double value = 0.0;
    std::vector<double> vector;  // interior samples, unit discrete L2
    double residual = 0.0;
};

class TridiagonalEigensolver {
public:
    explicit TridiagonalEigensolver(const LinearizedOperator& op)
        : a_(op.diagonal()), b_(op.off_diagonal()), h_(op.grid().spacing()) {
        const std::size_t m = a_.size();
        lo_ = std::numeric_limits<double>::max();
        hi_ = std::numeric_limits<double>::lowest();
        double bmax = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double r = (j > 0 ? std::abs(b_[j - 1]) : 0.0) + (j + 1 < m ? std::abs(b_[j]) : 0.0);
            lo_ = std::min(lo_, a_[j] - r);
            hi_ = std::max(hi_, a_[j] + r);
            if (j + 1 < m) bmax = std::max(bmax, std::abs(b_[j]));
        }
        pivmin_ = std::numeric_limits<double>::min() * std::max(1.0, bmax * bmax);
        norm_ = std::max(std::abs(lo_), std::abs(hi_));
    }

    Eigenpair solve(std::size_t index, std::span<const Eigenpair> previous, double tol) const {
        Eigenpair p;
        p.value = bisect_eigenvalue(a_, b_, index, lo_, hi_, pivmin_);

        const std::size_t m = a_.size();
        std::vector<double> v(m);
        // Deterministic start vector with components along every mode.
        for (std::size_t j = 0; j < m; ++j) v[j] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(j) + 0.3);

        const double shift = p.value + 16.0 * std::numeric_limits<double>::epsilon() * norm_;
        for (int it = 0; it < 8; ++it) {
            shifted_solve(a_, b_, shift, v);
            for (const auto& prev : previous) {
                double dot = 0.0;
                for (std::size_t j = 0; j < m; ++j) dot += prev.vector[j] * v[j] * h_;
                for (std::size_t j = 0; j < m; ++j) v[j] -= dot * prev.vector[j];
            }
            normalize(v);
            p.residual = residual(v, p.value);
            if (p.residual <= tol && it >= 1) break;
        }
        if (!(p.residual <= tol)) {
            throw NonConvergence(fmt::format("eigenpair {} (lambda = {}) residual {} above tolerance {}",
                                             index, p.value, p.residual, tol));
        }
        // Sign convention: largest-magnitude entry positive.
        const auto peak = std::max_element(v.begin(), v.end(),
                                           [](double x, double y) { return std::abs(x) < std::abs(y); });
        if (*peak < 0.0) {
            for (auto& x : v) x = -x;
        }
        p.vector = std::move(v);
        return p;
    }

private:
    void normalize(std::vector<double>& v) const {
        double s = 0.0;
        for (double x : v) s += x * x * h_;
        s = std::sqrt(s);
        for (auto& x : v) x /= s;
    }

    double residual(std::span<const double> v, double lambda) const {
        const std::size_t m = v.size();
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            double r = (a_[j] - lambda) * v[j];
            if (j > 0) r += b_[j - 1] * v[j - 1];
            if (j + 1 < m) r += b_[j] * v[j + 1];
            s += r * r * h_;
        }
        return std::sqrt(s);
    }

    std::span<const double> a_;
    std::span<const double> b_;
    double h_;
    double lo_ = 0.0, hi_ = 0.0, pivmin_ = 0.0, norm_ = 1.0;
};

std::vector<double> to_full_grid(const std::vector<double>& interior) {
    std::vector<double> full(interior.size() + 2, 0.0);
    std::copy(interior.begin(), interior.end(), full.begin() + 1);
    return full;
}

// Fraction of discrete L2 mass within |x| < L/4.
double central_mass_fraction(const Grid1D& g, const std::vector<double>& interior) {
    double inner = 0.0, total = 0.0;
    for (std::size_t j = 0; j < interior.size(); ++j) {
        const double m = interior[j] * interior[j];
        total += m;
        if (std::abs(g.x(j + 1)) < 0.25 * g.half_width()) inner += m;
    }
    return total > 0.0 ? inner / total : 0.0;
}

constexpr double kDelocalizedFraction = 0.5;
constexpr std::size_t kEdgeSearchExtra = 16;

}  // namespace

SpectralReport eigen_bottom(const LinearizedOperator& op, std::size_t k, double tol) {
    if (k == 0) throw InvalidArgument("eigen_bottom: k must be at least 1");
    if (!(tol > 0.0)) throw InvalidArgument("eigen_bottom: tolerance must be positive");
    if (k > op.dimension()) throw InvalidArgument("eigen_bottom: k exceeds the matrix dimension");

    const TridiagonalEigensolver solver(op);
    std::vector<Eigenpair> pairs;
    for (std::size_t j = 0; j < k; ++j) pairs.push_back(solver.solve(j, pairs, tol));

    SpectralReport r;
    r.tol_zero = zero_tolerance(op);
    for (const auto& p : pairs) {
        r.eigenvalues.push_back(p.value);
        r.eigenvectors.push_back(to_full_grid(p.vector));
        r.residuals.push_back(p.residual);
        if (p.value < -r.tol_zero) ++r.morse_index;
        if (std::abs(p.value) <= r.tol_zero) r.has_zero_mode = true;
    }

    // Essential-spectrum edge: first eigenvalue with a delocalized eigenvector.
    const auto& g = op.grid();
    for (std::size_t j = 0; j < std::min(op.dimension(), k + kEdgeSearchExtra); ++j) {
        if (j >= pairs.size()) pairs.push_back(solver.solve(j, pairs, tol));
        if (central_mass_fraction(g, pairs[j].vector) < kDelocalizedFraction) {
            r.ess_edge_estimate = pairs[j].value;
            break;
        }
    }
    r.growth_rate = growth_rate(r);
    return r;
}

double bilinear_form(std::span<const double> v, std::span<const double> w, const FieldState& background,
                     double q) {
    const auto& g = background.grid;
    if (v.size() != g.size() || w.size() != g.size() || background.u1.size() != g.size()) {
        throw GridMismatch("bilinear_form: sample counts differ from the background grid");
    }
    const double h = g.spacing();
    double grad = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) grad += (v[i + 1] - v[i]) * (w[i + 1] - w[i]);
    double pot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) pot += g.weight(i) * std::cos(background.u1[i]) * (v[i] * w[i]);
    const std::size_t z = g.zero_index();
    return grad / h + pot + q * std::cos(background.u1[z]) * (v[z] * w[z]);
}

double growth_rate(const SpectralReport& report) {
    if (report.eigenvalues.empty()) return 0.0;
    const double l1 = report.eigenvalues.front();
    return l1 < 0.0 ? std::sqrt(-l1) : 0.0;
}

double interface_identity_sampled(const FieldState& ground, double q) {
    const auto& g = ground.grid;
    const std::size_t z = g.zero_index();
    const auto& u = ground.u1;
    const double slope = (-3.0 * u[z] + 4.0 * u[z + 1] - u[z + 2]) / (2.0 * g.spacing());
    return 2.0 * std::sin(u[z]) + q * slope * std::cos(u[z]);
}

double interface_identity_closed_form(double q) {
    if (!(std::abs(q) > 2.0)) throw InvalidArgument("interface identity needs |q| > 2");
    return -2.0 * (q - 2.0) * std::sqrt(q * q - 4.0) / (q * q);
}

}  // namespace sgd
