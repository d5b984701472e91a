#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sgdelta/error.hpp"
#include "sgdelta/spectrum.hpp"
#include "sgdelta/waves.hpp"
#include "support.hpp"

using namespace sgd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> dense_eigenvalues(const LinearizedOperator& op) {
    const auto n = static_cast<Eigen::Index>(op.dimension());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, i) = op.diagonal()[i];
        if (i + 1 < n) a(i, i + 1) = a(i + 1, i) = op.off_diagonal()[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    return {es.eigenvalues().data(), es.eigenvalues().data() + n};
}

// Lowest even bound state of -v'' + cos Q v = lambda v on the half line with
// 2 v'(0+) = q cos Q(0) v(0): shoot the decaying solution in from x = X with
// RK4 and bisect on the interface mismatch.
double shooting_lambda1(double q, double lo, double hi) {
    const double y = matching_root(q).y;
    auto cosq = [y](double x) { return std::cos(4.0 * std::atan(y * std::exp(-x))); };
    auto mismatch = [&](double lambda) {
        const double X = 20.0, h = 1e-3;
        const double kappa = std::sqrt(1.0 - lambda);
        double v = std::exp(-kappa * X), dv = -kappa * v;
        auto rhs = [&](double x, double vv) { return (cosq(x) - lambda) * vv; };
        for (double x = X; x > 1e-12; x -= h) {
            // integrate backwards: d/dx (v, v') = (v', (cos Q - lambda) v)
            const double k1v = dv, k1d = rhs(x, v);
            const double k2v = dv - 0.5 * h * k1d, k2d = rhs(x - 0.5 * h, v - 0.5 * h * k1v);
            const double k3v = dv - 0.5 * h * k2d, k3d = rhs(x - 0.5 * h, v - 0.5 * h * k2v);
            const double k4v = dv - h * k3d, k4d = rhs(x - h, v - h * k3v);
            v -= h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
            dv -= h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
        }
        return 2.0 * dv - q * cosq(0.0) * v;
    };
    double flo = mismatch(lo);
    if ((flo < 0.0) == (mismatch(hi) < 0.0)) throw std::logic_error("shooting bracket has no sign change");
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = mismatch(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

FieldState background(const Grid1D& g, char kind, double q) {
    if (kind == '0') return FieldState::zeros(g);
    if (kind == 'K') return kink_profile(g, 0.0);
    return ground_state(g, q);
}

double dot(const Grid1D& g, const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.weight(i) * a[i] * b[i];
    return s;
}

}  // namespace

TEST_CASE("assembly reduces to the Laplacian plus cos K without the impurity", "[spectrum]") {
    const auto g = Grid1D::make(10.0, 201);
    const auto k = kink_profile(g, 0.0);
    const auto op = assemble_linearized(k, 0.0);
    const double h = g.spacing();
    REQUIRE(op.dimension() == g.size() - 2);
    for (std::size_t j = 0; j < op.dimension(); ++j) CHECK(op.diagonal()[j] == 2.0 / (h * h) + std::cos(k.u1[j + 1]));
    for (double b : op.off_diagonal()) CHECK(b == -1.0 / (h * h));

    const auto op4 = assemble_linearized(k, 4.0);
    CHECK(op4.interface_coefficient() == 4.0 * std::cos(k.u1[g.zero_index()]));
    CHECK(op4.diagonal()[g.zero_index() - 1] == op.diagonal()[g.zero_index() - 1] + op4.interface_coefficient() / h);
}

TEST_CASE("operator is symmetric", "[spectrum][property]") {
    const auto g = Grid1D::make(10.0, 401);
    const auto op = assemble_linearized(ground_state(g, 4.0), 4.0);
    for (unsigned seed = 0; seed < 5; ++seed) {
        const auto v = testing::random_field(g, seed);
        const auto w = testing::random_field(g, seed + 10);
        const double vw = dot(g, op.apply(v), w);
        const double wv = dot(g, v, op.apply(w));
        CHECK_THAT(vw, WithinAbs(wv, 1e-9 * std::abs(vw) + 1e-12));
    }
}

TEST_CASE("bisection eigenvalues agree with a dense solver", "[spectrum]") {
    const auto g = Grid1D::make(10.0, 401);
    for (auto [kind, q] : {std::pair{'K', 1.0}, std::pair{'K', -1.0}, std::pair{'Q', 4.0}, std::pair{'Q', -4.0},
                           std::pair{'0', -1.0}}) {
        const auto op = assemble_linearized(background(g, kind, q), q);
        const auto r = eigen_bottom(op, 5);
        const auto dense = dense_eigenvalues(op);
        for (std::size_t k = 0; k < 5; ++k) CHECK_THAT(r.eigenvalues[k], WithinAbs(dense[k], 1e-9));
        for (double res : r.residuals) CHECK(res <= 1e-8);
        for (std::size_t k = 0; k < 5; ++k) CHECK_THAT(l2_norm(g, r.eigenvectors[k]), WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("free operator matches the discrete dispersion relation", "[spectrum]") {
    const auto g = Grid1D::make(20.0, 801);
    const auto r = eigen_bottom(assemble_linearized(FieldState::zeros(g), 0.0), 4);
    const double h = g.spacing(), L = g.half_width();
    for (int k = 1; k <= 4; ++k) {
        const double exact = 1.0 + 2.0 / (h * h) * (1.0 - std::cos(k * std::numbers::pi * h / (2.0 * L)));
        CHECK_THAT(r.eigenvalues[k - 1], WithinRel(exact, 1e-10));
    }
    CHECK(r.morse_index == 0);
    CHECK_FALSE(r.has_zero_mode);
}

TEST_CASE("free operator bottom approaches the essential edge", "[spectrum]") {
    double previous = INFINITY;
    for (double L : {10.0, 20.0, 40.0}) {
        const auto g = Grid1D::make(L, static_cast<std::size_t>(100 * L) + 1);
        const double l1 = eigen_bottom(assemble_linearized(FieldState::zeros(g), 0.0), 1).eigenvalues[0];
        CHECK(l1 > 1.0);
        CHECK(l1 < previous);
        previous = l1;
    }
    CHECK(previous - 1.0 < 2e-3);
}

TEST_CASE("point well bound state", "[spectrum]") {
    const auto g = Grid1D::make(40.0, 8001);
    const auto r = eigen_bottom(assemble_linearized(FieldState::zeros(g), -1.0), 3);
    CHECK_THAT(r.eigenvalues[0], WithinAbs(0.75, 1e-3));
    CHECK(r.eigenvalues[1] > 1.0);
    REQUIRE(r.ess_edge_estimate.has_value());
    CHECK_THAT(*r.ess_edge_estimate, WithinAbs(1.0, 0.05));
}

TEST_CASE("translational zero mode of the free kink", "[spectrum]") {
    const auto g = Grid1D::make(40.0, 8001);
    const auto r = eigen_bottom(assemble_linearized(kink_profile(g, 0.0), 0.0), 2);
    CHECK_THAT(r.eigenvalues[0], WithinAbs(0.0, 1e-4));
    CHECK(r.has_zero_mode);
    CHECK(r.morse_index == 0);
    std::vector<double> kx(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) kx[i] = 2.0 / std::cosh(g.x(i));
    const double n = l2_norm(g, kx);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err += g.weight(i) * std::pow(r.eigenvectors[0][i] - kx[i] / n, 2);
    CHECK(std::sqrt(err) <= 1e-3);
}

TEST_CASE("spectral examples", "[spectrum]") {
    const auto g = Grid1D::make(40.0, 8001);
    const auto k1 = eigen_bottom(assemble_linearized(kink_profile(g, 0.0), 1.0), 3);
    CHECK(k1.morse_index == 1);
    CHECK(k1.growth_rate > 0.0);
    const auto km = eigen_bottom(assemble_linearized(kink_profile(g, 0.0), -1.0), 3);
    CHECK(km.eigenvalues[0] > 0.0);
    CHECK_FALSE(km.has_zero_mode);
    CHECK(eigen_bottom(assemble_linearized(ground_state(g, 4.0), 4.0), 3).morse_index == 1);
    CHECK(eigen_bottom(assemble_linearized(ground_state(g, -4.0), -4.0), 3).morse_index == 0);
}

TEST_CASE("ground-state bottom eigenvalue agrees with half-line shooting", "[spectrum]") {
    const auto g = Grid1D::make(20.0, 4001);
    for (auto [q, lo, hi] : {std::tuple{4.0, -3.0, 0.0}, std::tuple{-4.0, 0.5, 0.999}, std::tuple{6.0, -8.0, -5.0}}) {
        const double l1 = eigen_bottom(assemble_linearized(ground_state(g, q), q), 1).eigenvalues[0];
        CHECK_THAT(l1, WithinAbs(shooting_lambda1(q, lo, hi), 1e-3));
    }
}

TEST_CASE("Morse index and sign dichotomy across couplings", "[spectrum][property]") {
    const auto g = Grid1D::make(20.0, 2001);
    for (double q : {-10.0, -6.0, -4.0, -2.5, -1.0, -0.5, 0.5, 1.0, 2.5, 4.0, 6.0, 10.0}) {
        std::vector<char> kinds = {'0', 'K'};
        if (std::abs(q) > 2.0) kinds.push_back('Q');
        for (char kind : kinds) {
            const auto r = eigen_bottom(assemble_linearized(background(g, kind, q), q), 4);
            INFO("background " << kind << " q = " << q);
            CHECK(r.morse_index <= 1);
            if (kind != '0') {
                CHECK_FALSE(r.has_zero_mode);
                for (double l : r.eigenvalues) CHECK(std::abs(l) > r.tol_zero);
                if (q > 0.0) CHECK(r.morse_index == 1);
                if (q < 0.0) {
                    CHECK(r.morse_index == 0);
                    CHECK(r.eigenvalues[0] > 0.0);
                }
            }
        }
    }
}

TEST_CASE("bilinear form examples", "[spectrum]") {
    const auto g = Grid1D::make(20.0, 4001);
    const auto k = kink_profile(g, 0.0);
    const std::vector<double> zero(g.size(), 0.0);
    CHECK(bilinear_form(zero, zero, k, 1.0) == 0.0);

    std::vector<double> kx(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) kx[i] = 2.0 / std::cosh(g.x(i));
    CHECK_THAT(bilinear_form(kx, kx, k, 1.0), WithinAbs(-4.0, 1e-3));

    for (unsigned seed = 0; seed < 5; ++seed) {
        const auto v = testing::random_field(g, seed);
        const auto w = testing::random_field(g, seed + 7);
        CHECK(bilinear_form(v, w, k, 1.0) == bilinear_form(w, v, k, 1.0));
    }
}

TEST_CASE("bilinear form agrees with the matrix", "[spectrum][property]") {
    const auto g = Grid1D::make(10.0, 1001);
    for (auto [kind, q] : {std::pair{'K', 1.0}, std::pair{'Q', -4.0}, std::pair{'Q', 6.0}}) {
        const auto bg = background(g, kind, q);
        const auto op = assemble_linearized(bg, q);
        for (unsigned seed = 0; seed < 10; ++seed) {
            const auto v = testing::random_field(g, seed, 20);
            const double form = bilinear_form(v, v, bg, q);
            const double matrix = dot(g, op.apply(v), v);
            CHECK(std::abs(form - matrix) <= 1e-8 * h1_norm_squared(g, v));
        }
    }
}

TEST_CASE("growth rate", "[spectrum]") {
    SpectralReport r;
    r.eigenvalues = {-0.25};
    CHECK(growth_rate(r) == 0.5);
    r.eigenvalues = {0.3};
    CHECK(growth_rate(r) == 0.0);
}

TEST_CASE("interface quantity of the ground state", "[spectrum]") {
    CHECK_THAT(interface_identity_closed_form(4.0), WithinAbs(-0.86603, 1e-5));
    CHECK_THAT(interface_identity_closed_form(4.0), WithinAbs(-std::sqrt(12.0) / 4.0, 1e-12));
    // On Q: sin Q(0) = -4 s sqrt(q^2-4)/q^2, Q_x(0+) = -2 sqrt(q^2-4)/|q| and
    // cos Q(0) = (8 - q^2)/q^2 with s = sign q, so the sampled quantity is
    // -2 s sqrt(q^2 - 4)(12 - q^2)/q^2.
    const auto g = Grid1D::make(20.0, 8001);
    for (double q : {-6.0, -4.0, 3.0, 4.0, 6.0}) {
        const double derived = -2.0 * std::copysign(1.0, q) * std::sqrt(q * q - 4.0) * (12.0 - q * q) / (q * q);
        CHECK_THAT(interface_identity_sampled(ground_state(g, q), q), WithinAbs(derived, 1e-3));
    }
    CHECK_THROWS_AS(interface_identity_closed_form(1.0), InvalidArgument);
}

TEST_CASE("bound states converge in the box size and mesh", "[spectrum][property]") {
    const auto a = eigen_bottom(assemble_linearized(kink_profile(Grid1D::make(40.0, 8001), 0.0), 1.0), 1);
    const auto b = eigen_bottom(assemble_linearized(kink_profile(Grid1D::make(60.0, 12001), 0.0), 1.0), 1);
    CHECK(std::abs(a.eigenvalues[0] - b.eigenvalues[0]) < 1e-4);

    double l[3];
    const std::size_t nodes[3] = {1001, 2001, 4001};
    for (int k = 0; k < 3; ++k) {
        const auto g = Grid1D::make(20.0, nodes[k]);
        l[k] = eigen_bottom(assemble_linearized(FieldState::zeros(g), -1.0), 1).eigenvalues[0];
    }
    const double ratio = (l[0] - l[1]) / (l[1] - l[2]);
    CHECK_THAT(ratio, WithinAbs(4.0, 1.0));
}

TEST_CASE("eigen_bottom argument checks", "[spectrum]") {
    const auto g = Grid1D::make(5.0, 101);
    const auto op = assemble_linearized(FieldState::zeros(g), 1.0);
    CHECK_THROWS_AS(eigen_bottom(op, 0), InvalidArgument);
    CHECK_THROWS_AS(eigen_bottom(op, 1000), InvalidArgument);
    CHECK_THROWS_AS(eigen_bottom(op, 1, 0.0), InvalidArgument);
    CHECK_THROWS_AS(eigen_bottom(op, 3, 1e-300), NonConvergence);
}
