#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "finopt/core_solver.hpp"
#include "finopt/functionals.hpp"
#include "generators.hpp"

using namespace finopt;
constexpr double pi = std::numbers::pi;

namespace {

PhysicalParams fin_params(ConvectionProfile h) {
    PhysicalParams p;
    p.k = 10.0;
    p.h_r = h(0.1);
    p.h = std::move(h);
    p.T_d = 10.0;
    return p;
}

RadiusProfile cone(const Grid& g, double a_base, double a_tip) {
    RadiusProfile a{g, VectorXd(g.n_nodes()), std::min(a_base, a_tip)};
    for (Index i = 0; i < g.n_nodes(); ++i) a.values[i] = a_base + (a_tip - a_base) * g.node(i) / g.length();
    return a;
}

}  // namespace

TEST_CASE("cone volume and lateral surface against closed forms") {
    const double a0 = 2e-3, a1 = 1e-3, l = 0.1;
    const double exact_volume = l * (a0 * a0 + a0 * a1 + a1 * a1) / 3.0;
    const double exact_surface = 0.5 * (a0 + a1) * std::hypot(l, a0 - a1);
    double prev = INFINITY;
    for (Index n : {50, 100, 200}) {
        const auto a = cone(Grid(l, n), a0, a1);
        CHECK(surface(a) == doctest::Approx(exact_surface).epsilon(1e-14));
        const double err = std::abs(volume(a) - exact_volume);
        CHECK(err < prev / 3.9);
        prev = err;
    }
}

TEST_CASE("constant fin flux tends to the closed form k pi a0^2 s gamma dT") {
    const PhysicalParams p = fin_params(ConvectionProfile::constant(10.0));
    const double a0 = 1e-3, l = 0.1, beta = p.beta(0.0), s = std::sqrt(beta / a0);
    const double exact = p.k * pi * a0 * a0 * s * compute_gamma(a0, l, beta, p.beta_r()) * p.delta_T();
    double prev = INFINITY;
    for (Index n : {256, 512, 1024}) {
        const double err = std::abs(solve_flux(RadiusProfile::constant(Grid(l, n), a0), p) - exact) / exact;
        CHECK(err < prev / 3.5);
        prev = err;
    }
    CHECK(prev < 1e-5);
}

TEST_CASE("flux_gradient matches finite differences of flux_change") {
    gen::Rng r(5);
    for (int trial = 0; trial < 5; ++trial) {
        const Grid g(0.1, 60);
        const PhysicalParams p = fin_params(gen::convection(r, 0.1));
        const auto a = RadiusProfile::constant(g, 1e-3);
        SurfaceMeasure b = gen::density(r, g, 1e-3, 20e-3, false);
        b.floor = 0.5e-3;
        const VectorXd grad = flux_gradient(solve_temperature(a, b, p), p);
        for (Index j = 0; j < g.n_cells(); ++j) {
            const double d = 1e-5 * b.density[j];
            SurfaceMeasure up = b, down = b;
            up.density[j] += d;
            down.density[j] -= d;
            const double fd = (flux_change(a, b, up, p) - flux_change(a, b, down, p)) / (2.0 * d);
            CHECK(fd == doctest::Approx(grad[j]).epsilon(1e-7));
        }
    }
}

TEST_CASE("flux_change agrees with the difference of two solves when it is well conditioned") {
    const Grid g(0.1, 100);
    const PhysicalParams p = fin_params(ConvectionProfile::constant(5.0));
    const auto a = RadiusProfile::constant(g, 1e-3);
    const SurfaceMeasure b = SurfaceMeasure::constant(g, 1e-3, 1e-3);
    SurfaceMeasure c = b;
    c.density.head(10).array() += 2e-3;
    const double direct = solve_flux(a, c, p) - solve_flux(a, b, p);
    CHECK(flux_change(a, b, c, p) == doctest::Approx(direct).epsilon(1e-10));
}

namespace {

PhysicalParams unit_fin(double h) {
    PhysicalParams p;
    p.k = 1.0;
    p.h = ConvectionProfile::constant(h);
    p.h_r = h;
    p.T_d = 1.0;
    return p;
}

double swap_quotient(const RadiusProfile& a, const PhysicalParams& p, double x0, double c, double eps) {
    const SurfaceMeasure b = surface_density(a);
    SurfaceMeasure bs = swap_perturbation(b, x0, c, eps);
    bs.floor = 0.5 * a.floor;  // the swap may dip below a0 around x0
    return flux_change(a, b, bs, p) / eps;
}

}  // namespace

// The quotient's leading error is eps theta'(0) / dT / (1 - theta(x0)^2 / dT^2) (constant beta). For a
// convex theta that is at least eps / (2 x0) in size, i.e. exactly 1e-3 at x0 = l/2 and eps = 1e-3 l,
// so the quotient is checked against its predicted error and its Richardson extrapolation against 1e-3.
TEST_CASE("swap derivative: finite difference at x0 = l/2, c = a0/10, eps = 1e-3 l") {
    const PhysicalParams p = unit_fin(0.3);
    const double l = 1.0, a0 = 1.0, x0 = 0.5 * l, c = a0 / 10.0, eps = 1e-3 * l;
    const Grid g(l, 1 << 16);
    gen::Rng r(21);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = gen::profile(r, g, a0);
        const auto b = surface_density(a);
        const auto T = solve_temperature(a, b, p);
        const double exact = directional_derivative(a, b, p, x0, c);
        REQUIRE(exact > 0.0);  // moving surface toward the hot inlet helps
        const double q1 = swap_quotient(a, p, x0, c, eps), q2 = swap_quotient(a, p, x0, c, eps / 2);
        const double slope0 = (T.theta[1] - T.theta[0]) / g.spacing() / p.delta_T();
        const double th = T.theta_at(x0) / p.delta_T();
        const double predicted = eps * slope0 / (1.0 - th * th);
        CHECK((q1 - exact) / exact == doctest::Approx(predicted).epsilon(0.05));
        CHECK(std::abs(2.0 * q2 - q1 - exact) / exact < 1e-3);
    }
}

TEST_CASE("swap quotient within 1e-3 where the inlet gradient is mild") {
    const PhysicalParams p = unit_fin(0.3);
    const Grid g(1.0, 1 << 16);
    RadiusProfile a{g, VectorXd(g.n_nodes()), 1.0};
    for (Index i = 0; i < g.n_nodes(); ++i) a.values[i] = 1.5 + 3.0 * (1.0 - g.node(i));
    const double exact = directional_derivative(a, surface_density(a), p, 0.9, 0.5);
    CHECK(std::abs(swap_quotient(a, p, 0.9, 0.5, 1e-3) - exact) / exact < 1e-3);
}

TEST_CASE("gradient density is the nodal form of the cell gradient") {
    const Grid g(0.1, 40);
    const PhysicalParams p = fin_params(ConvectionProfile::affine(20.0, 5.0, 0.1));
    const auto T = solve_temperature(RadiusProfile::constant(g, 1e-3), p);
    const VectorXd nodal = gradient_density(T, p);
    const VectorXd cell = flux_gradient(T, p);
    for (Index j = 0; j < g.n_cells(); ++j) {
        const double th0 = T.theta[j], th1 = T.theta[j + 1], dT = p.delta_T();
        const double oracle = p.k * pi * p.beta(g.midpoint(j)) * g.spacing() * (th0 * th0 + th1 * th1) / (2.0 * dT);
        CHECK(cell[j] == doctest::Approx(oracle).epsilon(1e-13));
    }
    CHECK(nodal[0] == doctest::Approx(p.k * pi * p.beta(0.0) * p.delta_T()).epsilon(1e-14));
}

TEST_CASE("surface supremum closed form and hypotheses") {
    const PhysicalParams p = fin_params(ConvectionProfile::constant(10.0));
    const double a0 = 1e-3, l = 0.1, S0 = 3e-4, beta = p.beta(0.0);
    const double expected = p.k * pi * beta * p.delta_T() *
                            (std::pow(a0, 1.5) * compute_gamma(a0, l, beta, p.beta_r()) / std::sqrt(beta) + S0 - a0 * l);
    CHECK(surface_supremum(a0, l, S0, p) == doctest::Approx(expected).epsilon(1e-15));
    CHECK_THROWS_AS(surface_supremum(a0, l, a0 * l, p), std::invalid_argument);
    CHECK_THROWS_AS(surface_supremum(a0, l, S0, fin_params(ConvectionProfile::affine(5, 20, l))), std::invalid_argument);
}

TEST_CASE("supremum for beta = 2, beta_r = 1, S0 = 6 a0 l, dT = 10") {
    PhysicalParams p;
    p.k = 10.0;
    p.h = ConvectionProfile::constant(10.0);
    p.h_r = 10.0;
    p.T_d = 10.0;
    const double a0 = 1e-3, l = 0.1;
    // gamma = 1.0000... to 15 digits here: s l = 4.47, beta_r / s = 0.0224.
    const double s = std::sqrt(2.0 / a0), z = s * l, r = 1.0 / s;
    const double gamma = (std::tanh(z) + r) / (1.0 + r * std::tanh(z));
    const double expected = 10.0 * pi * 2.0 * 10.0 * (std::pow(a0, 1.5) * gamma / std::sqrt(2.0) + 5.0 * a0 * l);
    CHECK(surface_supremum(a0, l, 6.0 * a0 * l, p) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("generalized supremum reduces to the constant-h supremum") {
    const PhysicalParams p = fin_params(ConvectionProfile::constant(10.0));
    const double gen_sup = generalized_supremum(1e-3, 3e-4, p, Grid(0.1, 4096));
    CHECK(gen_sup == doctest::Approx(surface_supremum(1e-3, 0.1, 3e-4, p)).epsilon(1e-6));
    const double printed = generalized_supremum(1e-3, 3e-4, p, Grid(0.1, 4096), TipTerm::AsPrinted);
    CHECK(printed < gen_sup);
    CHECK_THROWS_AS(generalized_supremum(1e-3, 3e-4, fin_params(ConvectionProfile::affine(5, 20, 0.1)), Grid(0.1, 100)),
                    HypothesisViolated);
}

TEST_CASE("classical and relaxed flux agree and report is consistent") {
    gen::Rng r(9);
    for (int trial = 0; trial < 10; ++trial) {
        const Grid g = gen::grid(r, 0.1);
        const auto a = gen::profile(r, g, 1e-3);
        const auto p = gen::params(r, 0.1);
        const auto T = solve_temperature(a, p);
        const auto rep = flux_report(a, surface_density(a), p, T);
        CHECK(rep.relative_gap <= 1e-11);
        CHECK(heat_flux_boundary(a, T, p) == doctest::Approx(rep.F_boundary).epsilon(1e-15));
        CHECK(solve_flux(a, p) == doctest::Approx(rep.F_integral).epsilon(1e-15));
    }
}

TEST_CASE("surface radius bound closed form") {
    CHECK(surface_radius_bound(3e-4, 0.1) == doctest::Approx(std::sqrt(9e-6 + 1.2e-3)).epsilon(1e-15));
}
