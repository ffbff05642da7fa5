#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "finopt/core_solver.hpp"
#include "finopt/functionals.hpp"
#include "finopt/optimizer.hpp"
#include "finopt/sequences.hpp"
#include "generators.hpp"

using namespace finopt;

namespace {

OptimConfig base_config(ConvectionProfile h, double M, Index n = 200) {
    OptimConfig c;
    c.a0 = 1e-3;
    c.M = M;
    c.S0 = 3e-4;
    c.grid = Grid(0.1, n);
    c.params.k = 10.0;
    c.params.h_r = h(0.1);
    c.params.h = std::move(h);
    c.params.T_d = 10.0;
    return c;
}

}  // namespace

TEST_CASE("projection is feasible, idempotent and satisfies the obtuse-angle condition") {
    gen::Rng r(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = r.integer(1, 60);
        const double lo = 1.0, hi = r.uniform(1.5, 5.0), h = r.uniform(0.01, 1.0);
        const double budget = n * h * r.uniform(1.0, hi);
        VectorXd z(n);
        for (Index i = 0; i < n; ++i) z[i] = r.uniform(-2.0, 8.0);
        const VectorXd y = project_box_budget(z, lo, hi, h, budget);
        CHECK(y.minCoeff() >= lo);
        CHECK(y.maxCoeff() <= hi);
        CHECK(h * y.sum() <= budget * (1 + 1e-12));
        CHECK((project_box_budget(y, lo, hi, h, budget) - y).cwiseAbs().maxCoeff() <= 1e-12);
        // (z - y) . (w - y) <= 0 for every feasible w.
        for (int k = 0; k < 20; ++k) {
            VectorXd w(n);
            for (Index i = 0; i < n; ++i) w[i] = r.uniform(lo, hi);
            w = project_box_budget(w, lo, hi, h, budget);
            CHECK((z - y).dot(w - y) <= 1e-9 * (1 + z.norm() * w.norm()));
        }
    }
}

TEST_CASE("projection rejects an infeasible budget") {
    CHECK_THROWS_AS(project_box_budget(VectorXd::Ones(4), 1.0, 2.0, 1.0, 3.0), std::invalid_argument);
}

TEST_CASE("constant h: optimum is the bang-bang density") {
    for (double M : {6.25e-3, 25e-3}) {
        const auto cfg = base_config(ConvectionProfile::constant(10.0), M);
        const auto res = optimize(cfg);
        CHECK(res.converged);
        const auto rep = verify_bang_structure(res, cfg);
        CHECK(rep.intermediate_cells <= 1);
        CHECK(rep.switch_error_cells <= 1.0);
        CHECK(rep.relative_gap <= 1e-12);
        CHECK(check_kkt(res, cfg).max_violation <= 1e-8);
        CHECK(res.b_opt.total() == doctest::Approx(cfg.S0).epsilon(1e-12));
        for (std::size_t k = 1; k < res.trace.size(); ++k) CHECK(res.trace[k] >= res.trace[k - 1] * (1 - 1e-14));
    }
}

TEST_CASE("optimizer beats random feasible designs") {
    const auto cfg = base_config(ConvectionProfile::affine(20.0, 5.0, 0.1), 12.5e-3);
    const auto res = optimize(cfg);
    gen::Rng r(8);
    for (int k = 0; k < 20; ++k) {
        VectorXd raw(cfg.grid.n_cells());
        for (Index j = 0; j < raw.size(); ++j) raw[j] = r.uniform(cfg.a0, cfg.M);
        SurfaceMeasure b{cfg.grid, project_box_budget(raw, cfg.a0, cfg.M, cfg.grid.spacing(), cfg.S0), {}, cfg.a0};
        CHECK(relaxed_objective(b, cfg.params) <= res.objective);
    }
}

TEST_CASE("optimize is deterministic") {
    const auto cfg = base_config(ConvectionProfile::affine(0.2, 10.0, 0.1), 4e-3);
    const auto r1 = optimize(cfg), r2 = optimize(cfg);
    CHECK(r1.objective == r2.objective);
    CHECK((r1.b_opt.density - r2.b_opt.density).cwiseAbs().maxCoeff() == 0.0);
    CHECK(r1.iterations == r2.iterations);
}

TEST_CASE("sweep objectives are non-decreasing in M and match single runs") {
    const auto cfg = base_config(ConvectionProfile::affine(20.0, 5.0, 0.1), 0.0);
    const std::vector<double> Ms{6.25e-3, 12.5e-3, 25e-3, 50e-3};
    const auto sweep = sweep_M(cfg, Ms);
    CHECK(sweep.non_decreasing);
    REQUIRE(sweep.members.size() == Ms.size());
    OptimConfig one = cfg;
    one.M = Ms[1];
    CHECK(optimize(one).objective == sweep.members[1].objective);
    CHECK_THROWS_AS(sweep_M(cfg, {12.5e-3, 6.25e-3}), std::invalid_argument);
}

TEST_CASE("step h: excess gathers at the step") {
    OptimConfig cfg = base_config(ConvectionProfile::step(1e-3, 1.0, 0.05), 50e-3);
    cfg.a0 = 0.5e-3;
    cfg.S0 = 1.5e-4;
    const auto res = optimize(cfg);
    CHECK(excess_fraction(res.b_opt, 0.045, 0.055) >= 0.8);
}

TEST_CASE("excess_fraction counts partial cells pro rata") {
    const Grid g(1.0, 4);
    SurfaceMeasure b = SurfaceMeasure::constant(g, 1.0, 1.0);
    b.density << 3.0, 1.0, 2.0, 1.0;  // excess 0.5 and 0.25
    CHECK(excess_fraction(b, 0.0, 0.25) == doctest::Approx(2.0 / 3.0));
    CHECK(excess_fraction(b, 0.125, 0.625) == doctest::Approx((0.25 + 0.125) / 0.75));
}

TEST_CASE("optimizer validation") {
    auto cfg = base_config(ConvectionProfile::constant(10.0), 0.5e-3);
    CHECK_THROWS_AS(optimize(cfg), std::invalid_argument);  // M <= a0
    cfg = base_config(ConvectionProfile::constant(10.0), 1.5e-3);
    CHECK_THROWS_AS(optimize(cfg), std::invalid_argument);  // x_M > l
    cfg = base_config(ConvectionProfile::constant(10.0), 6.25e-3);
    cfg.S0 = 0.5e-4;
    CHECK_THROWS_AS(optimize(cfg), std::invalid_argument);
    cfg = base_config(ConvectionProfile::constant(10.0), 6.25e-3);
    cfg.newton_max_free = -1;
    CHECK_THROWS_AS(optimize(cfg), std::invalid_argument);
    CHECK(std::string(to_string(CellState::Upper)) != std::string(to_string(CellState::Lower)));
}
