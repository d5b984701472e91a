#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "sgdelta/dynamics.hpp"
#include "sgdelta/error.hpp"
#include "sgdelta/mollifier.hpp"
#include "sgdelta/waves.hpp"
#include "support.hpp"

using namespace sgd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// int_{-1}^{1} exp(-1/(1-s^2)) ds by composite Simpson on a fine mesh.
double bump_integral() {
    const int n = 200000;
    const double h = 2.0 / n;
    auto f = [](double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; };
    double sum = f(-1.0) + f(1.0);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(-1.0 + i * h);
    return sum * h / 3.0;
}

EvolveOptions quiet() {
    EvolveOptions o;
    o.store_states = false;
    return o;
}

}  // namespace

TEST_CASE("mollifier profile", "[dynamics]") {
    const auto g = Grid1D::make(20.0, 4001);
    for (double eps : {0.02, 0.05, 0.1, 0.4}) {
        const auto m = mollifier_profile(g, eps);
        CHECK_THAT(m.mass(), WithinAbs(1.0, 1e-8));
        CHECK_THAT(integrate(g, m.samples()), WithinAbs(1.0, 1e-8));
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(m.samples()[i] >= 0.0);
            if (std::abs(g.x(i)) > eps) CHECK(m.samples()[i] == 0.0);
        }
    }
    // Peak of eps^-1 rho(0) with rho = exp(-1/(1-s^2)) / int exp(-1/(1-s^2)).
    const auto m = mollifier_profile(g, 0.1);
    const double peak = std::exp(-1.0) / bump_integral() / 0.1;
    CHECK_THAT(m.samples()[g.zero_index()], WithinRel(peak, 1e-3));
    CHECK_THAT(m.samples()[g.zero_index()] * 0.1, WithinAbs(0.82857, 1e-3));

    CHECK_THROWS_AS(mollifier_profile(g, 0.015), UnresolvedMollifier);
}

TEST_CASE("step keeps equilibria fixed", "[dynamics]") {
    const auto g = Grid1D::make(10.0, 1001);
    const double dt = default_time_step(g);
    for (double q : {-3.0, 0.0, 2.0}) {
        const auto zero = FieldState::zeros(g);
        const auto next = step(zero, ImpurityParams::sharp(q), dt);
        CHECK(deviation_norm(next, zero).total == 0.0);

        auto pi_state = FieldState::zeros(g);
        for (auto& v : pi_state.u1) v = std::numbers::pi;
        for (const auto& p : {ImpurityParams::sharp(q), ImpurityParams::mollified(q, 0.1),
                              ImpurityParams::mollified(q, 0.1, MollifiedCoupling::Pointwise)}) {
            const auto s = step(pi_state, p, dt);
            CHECK(deviation_norm(s, pi_state).total <= 1e-13);
        }
    }
}

TEST_CASE("one step away from the ground state", "[dynamics]") {
    // Deviation after one step under joint dx/dt refinement (dt = dx/2).
    double dev[3];
    const std::size_t nodes[3] = {4001, 8001, 16001};
    for (int k = 0; k < 3; ++k) {
        const auto g = Grid1D::make(20.0, nodes[k]);
        const auto q = ground_state(g, -4.0);
        dev[k] = deviation_norm(step(q, ImpurityParams::sharp(-4.0), default_time_step(g)), q).total;
    }
    CHECK(dev[0] <= 2e-6);
    CHECK(dev[0] / dev[1] >= 4.0);
    CHECK(dev[1] / dev[2] >= 4.0);
}

TEST_CASE("one step from the ground state within 1e-6 at dx = 0.01", "[dynamics][!shouldfail]") {
    // Measured 1.51e-6 at dx = 0.01, dt = 0.005.
    const auto g = Grid1D::make(20.0, 4001);
    const auto q = ground_state(g, -4.0);
    CHECK(deviation_norm(step(q, ImpurityParams::sharp(-4.0), 0.005), q).total <= 1e-6);
}

TEST_CASE("CFL violations are rejected", "[dynamics]") {
    const auto g = Grid1D::make(10.0, 1001);
    const auto s = FieldState::zeros(g);
    CHECK_THROWS_AS(step(s, ImpurityParams::sharp(1.0), 0.95 * g.spacing()), CflViolation);
    CHECK_NOTHROW(step(s, ImpurityParams::sharp(1.0), 0.9 * g.spacing()));
    CHECK_THROWS_AS(evolve(s, ImpurityParams::sharp(1.0), 1.0, g.spacing()), CflViolation);
    CHECK_THROWS_AS(evolve(s, ImpurityParams::sharp(1.0), -1.0, 0.5 * g.spacing()), InvalidArgument);
}

TEST_CASE("kink at q = -1 stays put", "[dynamics]") {
    const auto g = Grid1D::make(20.0, 4001);
    const auto k = kink_profile(g, 0.0);
    const auto tr = evolve(k, ImpurityParams::sharp(-1.0), 10.0, default_time_step(g), quiet());
    CHECK(deviation_norm(tr.final_state, k).total <= 1e-4);
    CHECK(tr.final_state.t == 10.0);
}

TEST_CASE("free boosted kink travels at its speed", "[dynamics]") {
    const auto g = Grid1D::make(20.0, 4001);
    const auto tr = evolve(boosted_kink_state(g, 0.5, 0.0, 0.0), ImpurityParams::sharp(0.0), 10.0,
                           default_time_step(g), quiet());
    CHECK_THAT(*kink_center(tr.final_state), WithinAbs(5.0, 0.01));
    const auto exact = boosted_kink_state(g, 0.5, 0.0, 10.0);
    CHECK(deviation_norm(tr.final_state, exact).total <= 1e-2);
}

TEST_CASE("trajectory bookkeeping", "[dynamics]") {
    const auto g = Grid1D::make(10.0, 1001);
    EvolveOptions opt;
    opt.output_stride = 7;
    // 1.234 is not a multiple of dt: the last step is shortened.
    const auto tr = evolve(kink_profile(g, 0.0), ImpurityParams::sharp(0.5), 1.234, default_time_step(g), opt);
    REQUIRE(tr.times.size() == tr.states.size());
    REQUIRE(tr.times.size() == tr.energies.size());
    REQUIRE(tr.times.size() == tr.bound_series.size());
    for (std::size_t k = 1; k < tr.times.size(); ++k) CHECK(tr.times[k] > tr.times[k - 1]);
    CHECK(tr.times.front() == 0.0);
    CHECK(tr.times.back() == 1.234);
    CHECK(tr.final_state.t == 1.234);
    CHECK(tr.dt == default_time_step(g));
    CHECK(tr.dx == g.spacing());
}

TEST_CASE("energy drift over a long run", "[dynamics][property]") {
    const auto g = Grid1D::make(20.0, 4001);
    const auto start = boosted_kink_state(g, 0.3, -3.0, 0.0);
    const auto tr = evolve(start, ImpurityParams::sharp(-0.5), 100.0, default_time_step(g), quiet());
    CHECK(tr.max_relative_energy_drift() <= 1e-4);
    CHECK(tr.bound_ratio() <= 3.0);
}

TEST_CASE("energy drift scales with dt squared", "[dynamics][property]") {
    const auto g = Grid1D::make(20.0, 2001);
    const auto start = boosted_kink_state(g, 0.5, -2.0, 0.0);
    const double drift_coarse =
        evolve(start, ImpurityParams::sharp(-1.0), 10.0, 0.5 * g.spacing(), quiet()).max_relative_energy_drift();
    const double drift_fine =
        evolve(start, ImpurityParams::sharp(-1.0), 10.0, 0.25 * g.spacing(), quiet()).max_relative_energy_drift();
    const double ratio = drift_coarse / drift_fine;
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.0);
}

TEST_CASE("time reversibility", "[dynamics][property]") {
    const auto g = Grid1D::make(20.0, 2001);
    const auto start = boosted_kink_state(g, 0.4, -2.0, 0.0);
    for (const auto& p : {ImpurityParams::sharp(-1.0), ImpurityParams::mollified(2.0, 0.2)}) {
        const double dt = default_time_step(g);
        const auto fwd = evolve(start, p, 5.0, dt, quiet());
        const auto back = evolve(fwd.final_state, p, 5.0, -dt, quiet());
        const double steps = 5.0 / dt;
        double worst = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            worst = std::max(worst, std::abs(back.final_state.u1[i] - start.u1[i]));
            worst = std::max(worst, std::abs(back.final_state.u2[i] - start.u2[i]));
        }
        CHECK(worst <= 10.0 * std::numeric_limits<double>::epsilon() * steps * 2.0 * std::numbers::pi);
        CHECK_THAT(back.final_state.t, WithinAbs(0.0, 1e-12));
    }
}

TEST_CASE("finite propagation speed", "[dynamics][property]") {
    const auto g = Grid1D::make(20.0, 2001);
    auto s = FieldState::zeros(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.x(i);
        s.u1[i] = std::abs(x) < 1.0 ? 0.3 * std::pow(1.0 - x * x, 4) : 0.0;
    }
    const double T = 3.0, dt = default_time_step(g);
    const auto tr = evolve(s, ImpurityParams::sharp(-1.0), T, dt, quiet());
    // The stencil reaches one node per step; past the light cone only a dispersive tail remains.
    const double cone = 1.0 + T + 25.0 * g.spacing();
    const double stencil = 1.0 + (std::round(T / dt) + 1.0) * g.spacing();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = std::abs(g.x(i));
        if (x > stencil) {
            CHECK(tr.final_state.u1[i] == 0.0);
            CHECK(tr.final_state.u2[i] == 0.0);
        } else if (x > cone) {
            CHECK(std::abs(tr.final_state.u1[i]) <= 1e-8);
            CHECK(std::abs(tr.final_state.u2[i]) <= 1e-8);
        }
    }
}

TEST_CASE("runaway states raise BlowUp", "[dynamics]") {
    const auto g = Grid1D::make(10.0, 201);
    auto s = FieldState::zeros(g);
    s.u1[g.zero_index()] = 0.1;
    // A point coupling far beyond the explicit stability limit of the zero node.
    try {
        evolve(s, ImpurityParams::sharp(-1e6), 50.0, default_time_step(g), quiet());
        FAIL("expected BlowUp");
    } catch (const BlowUp& e) {
        CHECK(e.time() > 0.0);
        CHECK(e.time() <= 50.0);
    }
}

TEST_CASE("linear reference solution", "[dynamics]") {
    const auto g = Grid1D::make(10.0, 401);
    const LinearDatum zero{[](double) { return 0.0; }, [](double) { return 0.0; }, 1.0};
    const auto z = linear_kg_reference(g, zero, 2.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(z.u1[i] == 0.0);
        CHECK(z.u2[i] == 0.0);
    }

    const LinearDatum bump{[](double x) { return std::abs(x) < 1.0 ? std::pow(1.0 - x * x, 3) : 0.0; },
                           [](double x) { return std::abs(x) < 1.0 ? 0.5 * std::pow(1.0 - x * x, 2) : 0.0; }, 1.0};
    const auto r = linear_kg_reference(g, bump, 2.0);
    bool inside_nonzero = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (std::abs(g.x(i)) > 3.0) {
            CHECK(r.u1[i] == 0.0);
            CHECK(r.u2[i] == 0.0);
        } else if (r.u1[i] != 0.0) {
            inside_nonzero = true;
        }
    }
    CHECK(inside_nonzero);
    CHECK_THROWS_AS(linear_kg_reference(g, bump, 9.5), LightConeExit);
}

TEST_CASE("linearized stepper converges to the linear reference", "[dynamics][property]") {
    const LinearDatum datum{[](double) { return 0.0; }, [](double x) { return std::exp(-4.0 * x * x); }, 4.0};
    double errors[3];
    const std::size_t nodes[3] = {201, 401, 801};
    for (int k = 0; k < 3; ++k) {
        const auto g = Grid1D::make(10.0, nodes[k]);
        auto s = FieldState::zeros(g);
        for (std::size_t i = 0; i < g.size(); ++i) s.u2[i] = datum.u2(g.x(i));
        auto opt = quiet();
        opt.nonlinearity = Nonlinearity::LinearKleinGordon;
        const auto tr = evolve(s, ImpurityParams::sharp(0.0), 1.0, default_time_step(g), opt);
        errors[k] = deviation_norm(tr.final_state, linear_kg_reference(g, datum, 1.0)).total;
    }
    CHECK_THAT(errors[0] / errors[1], WithinAbs(4.0, 0.5));
    CHECK_THAT(errors[1] / errors[2], WithinAbs(4.0, 0.5));
}

TEST_CASE("sampled-datum reference matches the continuous one", "[dynamics]") {
    const auto g = Grid1D::make(10.0, 801);
    const LinearDatum datum{[](double x) { return 0.5 * std::exp(-3.0 * x * x); }, [](double) { return 0.0; }, 4.0};
    auto s = FieldState::zeros(g);
    for (std::size_t i = 0; i < g.size(); ++i) s.u1[i] = datum.u1(g.x(i));
    const auto a = linear_kg_reference(g, datum, 1.0);
    const auto b = linear_kg_reference(s, 1.0);
    CHECK(deviation_norm(a, b).total <= 1e-4);
}

TEST_CASE("pointwise and paired couplings differ but share equilibria", "[dynamics]") {
    const auto g = Grid1D::make(10.0, 1001);
    auto s = FieldState::zeros(g);
    s.u1 = testing::sampled(g, [](double x) { return 1.0 + 0.5 * x; });
    const auto a = step(s, ImpurityParams::mollified(-3.0, 0.2), default_time_step(g));
    const auto b = step(s, ImpurityParams::mollified(-3.0, 0.2, MollifiedCoupling::Pointwise), default_time_step(g));
    CHECK(deviation_norm(a, b).total > 0.0);
}
