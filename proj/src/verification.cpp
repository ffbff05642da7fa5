#include "finopt/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <utility>

#include "finopt/core_solver.hpp"
#include "finopt/functionals.hpp"
#include "finopt/optimizer.hpp"
#include "finopt/sequences.hpp"

namespace finopt {

namespace {

constexpr double pi = std::numbers::pi;

std::string printf_string(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Reference setting: a0 = 1 mm, l = 100 mm, lateral area 6 pi a0 l (S0 = 3 a0 l), k = 10, T_d = 10,
// T_inf = 0, h_r = h(l).
constexpr double ref_a0 = 1e-3;
constexpr double ref_length = 0.1;
constexpr double ref_S0 = 3.0 * ref_a0 * ref_length;

PhysicalParams reference_params(ConvectionProfile h) {
    PhysicalParams p;
    p.k = 10.0;
    p.h_r = h(ref_length);
    p.h = std::move(h);
    p.T_d = 10.0;
    p.T_inf = 0.0;
    return p;
}

OptimConfig reference_config(const PhysicalParams& p, double a0, double S0, Index n_cells) {
    OptimConfig c;
    c.a0 = a0;
    c.S0 = S0;
    c.grid = Grid(ref_length, n_cells);
    c.params = p;
    return c;
}

}  // namespace

SuiteSettings::SuiteSettings()
    : params(reference_params(ConvectionProfile::affine(20.0, 5.0, ref_length))),
      M_list{6.25e-3, 12.5e-3, 25e-3, 50e-3} {}

RadiusProfile random_profile(const Grid& grid, double a0, std::mt19937_64& rng) {
    // a = a0 (1 + sum of a few random non-negative bumps and ramps).
    const double length = grid.length();
    const int terms = std::uniform_int_distribution<int>(1, 4)(rng);
    std::vector<double> amp(terms), freq(terms), phase(terms);
    for (int t = 0; t < terms; ++t) {
        amp[t] = uniform(rng, 0.0, 3.0);
        freq[t] = uniform(rng, 0.5, 6.0);
        phase[t] = uniform(rng, 0.0, pi);
    }
    const double ramp = uniform(rng, -2.0, 2.0);
    VectorXd values(grid.n_nodes());
    for (Index i = 0; i < grid.n_nodes(); ++i) {
        const double s = grid.node(i) / length;
        double v = 1.0 + std::max(0.0, ramp) * (1.0 - s) + std::max(0.0, -ramp) * s;
        for (int t = 0; t < terms; ++t) v += amp[t] * std::pow(std::sin(freq[t] * pi * s + phase[t]), 2);
        values[i] = a0 * v;
    }
    return RadiusProfile{grid, std::move(values), a0};
}

ConvectionProfile random_convection(double length, std::mt19937_64& rng) {
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
        case 0: return ConvectionProfile::constant(uniform(rng, 0.5, 50.0));
        case 1: return ConvectionProfile::affine(uniform(rng, 0.5, 50.0), uniform(rng, 0.5, 50.0), length);
        case 2:
            return ConvectionProfile::step(uniform(rng, 0.5, 50.0), uniform(rng, 0.5, 50.0),
                                           uniform(rng, 0.1, 0.9) * length, uniform(rng, 0.0, 0.05) * length);
        default: {
            std::vector<double> xs{0.0}, hs{uniform(rng, 0.5, 50.0)};
            for (int i = 0; i < 4; ++i) {
                xs.push_back(xs.back() + uniform(rng, 0.05, 0.3) * length);
                hs.push_back(uniform(rng, 0.5, 50.0));
            }
            return ConvectionProfile::table(xs, hs);
        }
    }
}

RandomScenario random_scenario(std::mt19937_64& rng, bool with_atoms) {
    const double length = uniform(rng, 0.02, 0.3);
    const double a0 = uniform(rng, 0.2e-3, 3e-3);
    const Index n = std::uniform_int_distribution<Index>(50, 800)(rng);
    const Grid grid(length, n);
    RadiusProfile a = random_profile(grid, a0, rng);
    SurfaceMeasure b = surface_density(a);
    if (with_atoms) {
        const int atoms = std::uniform_int_distribution<int>(0, 3)(rng);
        for (int k = 0; k < atoms; ++k) {
            b.atoms.push_back({uniform(rng, 0.0, 1.0) * length, uniform(rng, 0.0, 2.0) * a0 * length});
        }
    }
    PhysicalParams p;
    p.k = uniform(rng, 1.0, 400.0);
    p.h = random_convection(length, rng);
    p.h_r = uniform(rng, 0.0, 1.0) < 0.3 ? 0.0 : p.h(length);
    p.T_inf = uniform(rng, -20.0, 40.0);
    p.T_d = p.T_inf + uniform(rng, 0.1, 100.0);
    return {std::move(a), std::move(b), std::move(p)};
}

CheckResult check_closed_form(const SuiteSettings& s) {
    CheckResult r{"closed_form", "closed-form temperature, second-order convergence", false, false, 0.0, 1e-6, {}};
    const PhysicalParams p = reference_params(ConvectionProfile::constant(10.0));
    auto error_at = [&](Index n) {
        const Grid g(ref_length, n);
        const auto T = solve_temperature(RadiusProfile::constant(g, ref_a0), p);
        double err = 0.0;
        for (Index i = 0; i < g.n_nodes(); ++i) {
            err = std::max(err, std::abs(T.temperature(i) - analytic_theta_constant(ref_a0, ref_length, p, g.node(i))));
        }
        return err / p.delta_T();
    };
    const Index N = s.convergence_cells;
    if (N < 8) {
        r.detail = "convergence_cells must be >= 8";
        return r;
    }
    const double e4 = error_at(N / 4), e2 = error_at(N / 2), e1 = error_at(N);
    const double r1 = e4 / e2, r2 = e2 / e1;
    r.measured = e1;
    const bool ratios_ok = r1 >= 3.2 && r1 <= 4.8 && r2 >= 3.2 && r2 <= 4.8;
    r.passed = e1 <= r.threshold && ratios_ok;
    r.detail = printf_string("n=%ld rel Linf err=%.3e; ratios %.3f (n/4->n/2), %.3f (n/2->n), need [3.2, 4.8]",
                             static_cast<long>(N), e1, r1, r2);
    return r;
}

CheckResult check_flux_identity(const SuiteSettings& s) {
    CheckResult r{"flux_identity", "boundary flux equals integral flux", false, false, 0.0, 1e-10, {}};
    std::mt19937_64 rng(s.seed);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto sc = random_scenario(rng, trial % 2 == 1);
        const auto T = solve_temperature(sc.a, sc.b, sc.p);
        worst = std::max(worst, flux_report(sc.a, sc.b, sc.p, T).relative_gap);
    }
    r.measured = worst;
    r.passed = worst <= r.threshold;
    r.detail = printf_string("max |F_boundary - F_integral| / F_boundary over 50 profiles = %.3e", worst);
    return r;
}

CheckResult check_temperature_bounds(const SuiteSettings& s) {
    CheckResult r{"temperature_bounds", "temperature monotone and within [T_inf, T_d]", false, false, 0.0, 1e-10, {}};
    std::mt19937_64 rng(s.seed + 1);
    double worst = 0.0;  // in units of Delta T
    for (int trial = 0; trial < 100; ++trial) {
        const auto sc = random_scenario(rng, trial % 3 == 0);
        const auto T = solve_temperature(sc.a, sc.b, sc.p);
        const double dT = sc.p.delta_T();
        for (Index i = 0; i < T.theta.size(); ++i) {
            worst = std::max({worst, -T.theta[i] / dT, (T.theta[i] - dT) / dT});
            if (i > 0) worst = std::max(worst, (T.theta[i] - T.theta[i - 1]) / dT);
        }
    }
    r.measured = worst;
    r.passed = worst <= r.threshold;
    r.detail = printf_string("largest violation over 100 profiles = %.3e Delta T", worst);
    return r;
}

CheckResult check_surface_sequence(const SuiteSettings&) {
    CheckResult r{"surface_supremum", "F(a_{S,m}) converges to the surface supremum", false, false, 0.0, 1e-2, {}};
    // Nondimensional fin: 1/m < l must hold from m = 8 on.
    PhysicalParams p;
    p.k = 1.0;
    p.h = ConvectionProfile::constant(0.05);
    p.h_r = 0.05;
    p.T_d = 1.0;
    const double a0 = 0.05, length = 1.0, S0 = 2.0 * a0 * length;
    const double sup = surface_supremum(a0, length, S0, p);
    std::vector<double> gaps;
    std::string detail;
    for (int m : {8, 16, 32, 64, 128}) {
        Index n = 8192;
        while (n < 16 * static_cast<Index>(m) * m) n *= 2;
        const Grid g(length, n);
        const double F = solve_flux(build_asm(S0, m, a0, g), build_bsm(S0, m, a0, g), p);
        gaps.push_back((sup - F) / sup);
        detail += printf_string("m=%d n=%ld gap=%.4e; ", m, static_cast<long>(n), gaps.back());
    }
    bool monotone = true;
    for (std::size_t i = 1; i < gaps.size(); ++i) monotone = monotone && gaps[i] < gaps[i - 1];
    r.measured = gaps.back();
    r.passed = monotone && gaps.back() >= 0.0 && gaps.back() <= r.threshold;
    r.detail = detail + (monotone ? "monotone" : "NOT monotone");
    return r;
}

CheckResult check_volume_sequence(const SuiteSettings&) {
    CheckResult r{"volume_unbounded", "volume-constrained flux grows linearly", false, false, 0.0, 0.02, {}};
    PhysicalParams p;
    p.k = 1.0;
    p.h = ConvectionProfile::constant(0.005);
    p.h_r = 0.005;
    p.T_d = 1.0;
    const double a0 = 1.0, length = 1.0, V0 = 2.0 * a0 * a0 * length;
    const Grid g(length, 1 << 16);
    VolumeSequenceOptions opts;
    opts.params = p;
    bool ok = true;
    double worst = -1.0;  // largest relative shortfall below the linear bound
    std::string detail;
    for (int n : {5, 10, 20}) {
        const auto member = build_volume_sequence(n, V0, a0, g, opts);
        const double linear = p.k * pi * p.beta(0.0) * p.delta_T() * (n - a0 * length);
        const double F = *member.flux;
        const double shortfall = 1.0 - F / linear;
        worst = std::max(worst, shortfall);
        ok = ok && member.volume <= V0 && F >= linear * (1.0 - r.threshold);
        detail += printf_string("n=%d m=%d vol=%.5f F/linear=%.4f; ", n, member.m, member.volume, F / linear);
    }
    r.measured = worst;
    r.passed = ok;
    r.detail = detail;
    return r;
}

CheckResult check_gradient(const SuiteSettings& s) {
    CheckResult r{"gradient", "flux gradient vs finite differences; swap derivative", false, false, 0.0, 1e-4, {}};
    std::mt19937_64 rng(s.seed + 2);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        // Random feasible density in the reference setting, random h.
        const PhysicalParams p = reference_params(random_convection(ref_length, rng));
        const Grid g(ref_length, 500);
        const double M = 50e-3;
        VectorXd raw(g.n_cells());
        for (Index j = 0; j < raw.size(); ++j) raw[j] = uniform(rng, ref_a0, M);
        SurfaceMeasure b{g, project_box_budget(raw, ref_a0, M, g.spacing(), ref_S0), {}, ref_a0};
        const auto a = RadiusProfile::constant(g, ref_a0);
        const VectorXd grad = flux_gradient(solve_temperature(a, b, p), p);
        for (Index j = 0; j < g.n_cells(); ++j) {
            const double delta = 1e-4 * b.density[j];
            SurfaceMeasure up = b, down = b;
            down.floor = 0.5 * ref_a0;
            up.density[j] += delta;
            down.density[j] -= delta;
            const double fd = (flux_change(a, b, up, p) - flux_change(a, b, down, p)) / (2.0 * delta);
            worst = std::max(worst, std::abs(fd - grad[j]) / std::abs(grad[j]));
        }
    }

    // Swap perturbation on a tapered fin, eps = 1e-3 l.
    PhysicalParams p;
    p.k = 1.0;
    p.h = ConvectionProfile::constant(0.3);
    p.h_r = 0.3;
    p.T_d = 1.0;
    const double length = 1.0, a0 = 1.0, eps = 1e-3 * length, x0 = 0.9 * length, c = 0.5;
    const Grid g(length, 1 << 18);
    RadiusProfile a{g, VectorXd(g.n_nodes()), a0};
    for (Index i = 0; i < g.n_nodes(); ++i) a.values[i] = 1.5 * a0 + 3.0 * a0 * (1.0 - g.node(i) / length);
    const SurfaceMeasure b = surface_density(a);
    const double fd = flux_change(a, b, swap_perturbation(b, x0, c, eps), p) / eps;
    const double exact = directional_derivative(a, b, p, x0, c);
    const double swap_err = std::abs(fd - exact) / std::abs(exact);

    r.measured = worst;
    r.passed = worst <= r.threshold && swap_err <= 1e-3;
    r.detail = printf_string("max rel component error %.3e (<= 1e-4); swap derivative rel error %.3e (<= 1e-3)",
                             worst, swap_err);
    return r;
}

CheckResult check_bang_bang(const SuiteSettings&) {
    CheckResult r{"bang_bang", "optimizer recovers the bang-bang density", false, false, 0.0, 1e-3, {}};
    const PhysicalParams p = reference_params(ConvectionProfile::constant(10.0));
    bool ok = true;
    double worst_gap = 0.0;
    std::string detail;
    for (double M : {6.25e-3, 12.5e-3, 25e-3, 50e-3}) {
        OptimConfig cfg = reference_config(p, ref_a0, ref_S0, 500);
        cfg.M = M;
        const auto res = optimize(cfg);
        const auto rep = verify_bang_structure(res, cfg);
        worst_gap = std::max(worst_gap, rep.relative_gap);
        ok = ok && rep.intermediate_cells <= 1 && rep.switch_error_cells <= 1.0 && rep.relative_gap <= r.threshold;
        detail += printf_string("M=%gmm: intermediate=%d switch err=%.2f cells gap=%.1e; ", M * 1e3,
                                rep.intermediate_cells, rep.switch_error_cells, rep.relative_gap);
    }
    r.measured = worst_gap;
    r.passed = ok;
    r.detail = detail;
    return r;
}

CheckResult check_supremum_monotonicity(const SuiteSettings&) {
    CheckResult r{"sweep_monotone", "sweep objectives increase toward the supremum", false, false, 0.0, 0.05, {}};
    const PhysicalParams p = reference_params(ConvectionProfile::constant(10.0));
    // x_M of two cells needs a fine grid for the band to sit at T ~ T_d.
    const Index n = 4096;
    OptimConfig cfg = reference_config(p, ref_a0, ref_S0, n);
    const double h = cfg.grid.spacing();
    const double M_max = ref_a0 + (ref_S0 - ref_a0 * ref_length) / (2.0 * h);
    const auto sweep = sweep_M(cfg, {6.25e-3, 12.5e-3, 25e-3, 50e-3, M_max});
    const double sup = surface_supremum(ref_a0, ref_length, ref_S0, p);
    const double top = sweep.members.back().objective;
    const double shortfall = 1.0 - top / sup;
    bool bounded = true;
    for (const auto& m : sweep.members) bounded = bounded && m.objective <= sup * 1.005;
    r.measured = shortfall;
    r.passed = sweep.non_decreasing && bounded && shortfall <= r.threshold;
    r.detail = printf_string("n=%ld, M_max=%.4g m (x_M = 2 cells): F/sup=%.4f; non-decreasing=%s; bounded=%s",
                             static_cast<long>(n), M_max, top / sup, sweep.non_decreasing ? "yes" : "no",
                             bounded ? "yes" : "no");
    return r;
}

CheckResult check_excess_placement(const SuiteSettings&) {
    CheckResult r{"excess_placement", "excess-mass concentration in the reference settings", false, false, 0.0, 0.0, {}};

    // Decreasing h: mass moves to the inlet as the cap grows.
    const PhysicalParams dec = reference_params(ConvectionProfile::affine(20.0, 5.0, ref_length));
    OptimConfig c1 = reference_config(dec, ref_a0, ref_S0, 500);
    const auto s1 = sweep_M(c1, {6.25e-3, 12.5e-3, 25e-3, 50e-3, 100e-3});
    const double f1 = excess_fraction(s1.members.back().b_opt, 0.0, 0.05 * ref_length);

    // Step at x_s = 50 mm on a 0.5 mm fin: mass gathers at the step.
    const double a0s = 0.5e-3, xs = 0.05;
    const PhysicalParams step = reference_params(ConvectionProfile::step(1e-3, 1.0, xs));
    OptimConfig c2 = reference_config(step, a0s, 3.0 * a0s * ref_length, 500);
    const auto s2 = sweep_M(c2, {2.3e-3, 2.6e-3, 2.9e-3, 3.2e-3, 50e-3});
    const double f2 = excess_fraction(s2.members.back().b_opt, xs - 0.05 * ref_length, xs + 0.05 * ref_length);

    // Increasing h without a cap: a regular design has no dominant cell.
    const PhysicalParams inc = reference_params(ConvectionProfile::affine(0.2, 10.0, ref_length));
    OptimConfig c3 = reference_config(inc, ref_a0, ref_S0, 500);
    c3.uncapped = true;
    c3.max_iters = 20000;
    const auto res3 = optimize(c3);
    std::vector<double> excess;
    double peak = 0.0;
    for (Index j = 0; j < res3.b_opt.density.size(); ++j) {
        const double e = res3.b_opt.density[j] - ref_a0;
        if (e > 1e-9 * ref_a0) excess.push_back(e);
        peak = std::max(peak, e);
    }
    double median = 0.0;
    if (!excess.empty()) {
        std::nth_element(excess.begin(), excess.begin() + static_cast<long>(excess.size() / 2), excess.end());
        median = excess[excess.size() / 2];
    }
    const double ratio = median > 0.0 ? peak / median : std::numeric_limits<double>::infinity();
    // A lone excess cell is the spike itself, not a regular design.
    const bool regular = excess.size() >= 3 && ratio <= 3.0;
    // Reported only: each node sees the mean of its two cells, so alternating cell patterns are
    // nearly invisible to the flux and inflate the per-cell ratio.
    std::vector<double> paired;
    double paired_peak = 0.0;
    for (Index j = 0; j + 1 < res3.b_opt.density.size(); ++j) {
        const double e = 0.5 * (res3.b_opt.density[j] + res3.b_opt.density[j + 1]) - ref_a0;
        if (e > 1e-9 * ref_a0) paired.push_back(e);
        paired_peak = std::max(paired_peak, e);
    }
    double paired_ratio = std::numeric_limits<double>::infinity();
    if (!paired.empty()) {
        std::nth_element(paired.begin(), paired.begin() + static_cast<long>(paired.size() / 2), paired.end());
        paired_ratio = paired_peak / paired[paired.size() / 2];
    }

    r.measured = ratio;
    r.threshold = 3.0;
    r.passed = f1 >= 0.9 && f2 >= 0.8 && regular;
    r.detail = printf_string(
        "decreasing h: %.4f of excess in first 5%% (>= 0.9); step h: %.4f within +-5%% of x_s (>= 0.8); "
        "increasing h uncapped: max/median excess %.3g over %zu cells, %s (<= 3; neighbour-averaged %.3g)",
        f1, f2, ratio, excess.size(), res3.converged ? "converged" : "not converged", paired_ratio);
    return r;
}

CheckResult check_surface_bound(const SuiteSettings& s) {
    CheckResult r{"surface_bound", "max radius below sqrt(S0^2/l^2 + 4 S0)", false, false, 0.0, 1e-9, {}};
    std::mt19937_64 rng(s.seed + 3);
    double worst = -1.0;  // max over profiles of max a / bound - 1
    for (int trial = 0; trial < 200; ++trial) {
        const auto sc = random_scenario(rng, false);
        const double S0 = surface(sc.a) * uniform(rng, 1.0, 1.5);
        const double bound = surface_radius_bound(S0, sc.a.grid.length());
        worst = std::max(worst, sc.a.values.maxCoeff() / bound - 1.0);
    }
    r.measured = worst;
    r.passed = worst <= r.threshold;
    r.detail = printf_string("max over 200 profiles of (max a / bound - 1) = %.3e", worst);
    return r;
}

CheckResult check_generalized_supremum(const SuiteSettings& s) {
    CheckResult r{"generalized_supremum", "sweep objectives below the x-dependent supremum", false, false, 0.0, 0.0, {}};
    const Grid grid(s.length, 500);
    double bound = 0.0;
    try {
        bound = generalized_supremum(s.a0, s.S0, s.params, grid);
    } catch (const HypothesisViolated& e) {
        r.skipped = true;
        r.passed = true;
        r.detail = std::string("hypothesis violated, skipped: ") + e.what();
        return r;
    }
    OptimConfig cfg;
    cfg.a0 = s.a0;
    cfg.S0 = s.S0;
    cfg.grid = grid;
    cfg.params = s.params;
    const auto sweep = sweep_M(cfg, s.M_list);
    double worst = -1.0;
    for (const auto& m : sweep.members) worst = std::max(worst, m.objective / bound - 1.0);
    r.measured = worst;
    r.threshold = 1e-12;
    r.passed = sweep.non_decreasing && worst <= r.threshold;
    r.detail = printf_string("bound %.6g W; max objective/bound - 1 = %.3e; non-decreasing=%s", bound, worst,
                             sweep.non_decreasing ? "yes" : "no");
    return r;
}

std::vector<CheckResult> run_suite(const SuiteSettings& s) {
    using Check = CheckResult (*)(const SuiteSettings&);
    const std::pair<const char*, Check> checks[] = {
        {"closed_form", check_closed_form},
        {"flux_identity", check_flux_identity},
        {"temperature_bounds", check_temperature_bounds},
        {"surface_supremum", check_surface_sequence},
        {"volume_unbounded", check_volume_sequence},
        {"gradient", check_gradient},
        {"bang_bang", check_bang_bang},
        {"sweep_monotone", check_supremum_monotonicity},
        {"excess_placement", check_excess_placement},
        {"surface_bound", check_surface_bound},
        {"generalized_supremum", check_generalized_supremum},
    };
    std::vector<CheckResult> out;
    for (const auto& [id, check] : checks) {
        try {
            out.push_back(check(s));
        } catch (const std::exception& e) {
            CheckResult failed;
            failed.id = id;
            failed.name = "check raised an exception";
            failed.detail = e.what();
            out.push_back(failed);
        }
    }
    return out;
}

}  // namespace finopt
