#include "finopt/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "finopt/core_solver.hpp"
#include "finopt/functionals.hpp"
#include "finopt/io.hpp"
#include "finopt/sequences.hpp"

namespace finopt {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string line(const char* fmt, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, a, b, c);
    return buf;
}

fs::path prepare_out(const ExperimentConfig& cfg) {
    const fs::path dir = cfg.out_dir;
    fs::create_directories(dir);
    return dir;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

Table node_table(const Grid& grid, const std::string& name, const VectorXd& values) {
    Table t;
    t.add("x_m", grid.nodes());
    t.add(name, values);
    return t;
}

Table cell_table(const SurfaceMeasure& b) {
    Table t;
    t.add("x_mid_m", b.grid.midpoints());
    t.add("b_m", b.density);
    return t;
}

/// Relaxed limit F(a0, a0 + (S - a0 l) delta_0): beta times theta of the a0 fin plus the inlet atom.
double relaxed_limit(double a0, double S, const PhysicalParams& p, const Grid& grid) {
    const auto a = RadiusProfile::constant(grid, a0);
    SurfaceMeasure b = SurfaceMeasure::constant(grid, a0, a0);
    const TemperatureField T = solve_temperature(a, b, p);
    b.atoms.push_back({0.0, S - a0 * grid.length()});
    return heat_flux_relaxed(a, b, p, T);
}

/// Max over median of the cell excess b - a0 on its support.
double peak_to_median(const SurfaceMeasure& b) {
    std::vector<double> excess;
    double peak = 0.0;
    for (Index j = 0; j < b.density.size(); ++j) {
        const double e = b.density[j] - b.floor;
        if (e > 1e-9 * b.floor) excess.push_back(e);
        peak = std::max(peak, e);
    }
    if (excess.empty()) return 0.0;
    std::nth_element(excess.begin(), excess.begin() + static_cast<long>(excess.size() / 2), excess.end());
    return peak / excess[excess.size() / 2];
}

json structure_json(const OptimResult& res, const OptimConfig& oc, const ExperimentConfig& cfg) {
    json r;
    r["objective_W"] = res.objective;
    r["converged"] = res.converged;
    r["iterations"] = res.iterations;
    r["stationarity"] = res.stationarity;
    const KktReport kkt = check_kkt(res, oc);
    r["kkt_multiplier"] = kkt.multiplier;
    r["kkt_violation"] = kkt.max_violation;
    r["S0_m2"] = oc.S0;
    r["uncapped"] = oc.uncapped;
    r["switch_estimate_m"] = res.switch_estimate;
    if (!oc.uncapped) {
        const BangReport bang = verify_bang_structure(res, oc);
        r["M_m"] = oc.M;
        r["x_M_m"] = bang.x_M;
        r["switch_location_m"] = bang.switch_location;
        r["switch_equivalent_m"] = bang.switch_equivalent;
        r["switch_error_cells"] = bang.switch_error_cells;
        r["intermediate_cells"] = bang.intermediate_cells;
        r["inlet_bang_objective_W"] = bang.bang_objective;
        r["inlet_bang_relative_gap"] = bang.relative_gap;
    }
    const double length = oc.grid.length();
    r["excess_fraction_first_5pct"] = excess_fraction(res.b_opt, 0.0, 0.05 * length);
    if (cfg.params.h.kind() == ConvectionProfile::Kind::Step) {
        const double xs = cfg.params.h.step_location();
        r["step_location_m"] = xs;
        r["excess_fraction_near_step"] = excess_fraction(res.b_opt, xs - 0.05 * length, xs + 0.05 * length);
    }
    r["excess_peak_to_median"] = peak_to_median(res.b_opt);
    if (cfg.params.h.is_constant()) {
        const double sup = surface_supremum(oc.a0, length, oc.S0, oc.params);
        r["supremum_W"] = sup;
        r["objective_over_supremum"] = res.objective / sup;
    }
    r["reconstruction_error"] = res.reconstruction_error;
    return r;
}

/// Writes one optimizer result with file names ending in `suffix`.
void write_result(const OptimResult& res, const OptimConfig& oc, const ExperimentConfig& cfg, const fs::path& dir,
                  const std::string& suffix, CommandResult& out) {
    Table b = cell_table(res.b_opt);
    std::vector<double> state;
    for (CellState s : res.active_set) state.push_back(s == CellState::Lower ? -1.0 : s == CellState::Upper ? 1.0 : 0.0);
    b.add("state", std::move(state));
    b.add("gradient_W_per_m", res.gradient);
    out.files.push_back(write_table(dir / ("b_opt" + suffix), b, cfg.format));
    if (res.reconstruction_error.empty()) {
        out.files.push_back(write_table(dir / ("a_opt" + suffix), node_table(oc.grid, "a_m", res.a_opt.values), cfg.format));
    }
    const TemperatureField T = solve_temperature(RadiusProfile::constant(oc.grid, oc.a0), res.b_opt, oc.params);
    out.files.push_back(write_table(dir / ("T_opt" + suffix), node_table(oc.grid, "T_degC", T.temperatures()), cfg.format));
    Table trace;
    std::vector<double> it(res.trace.size());
    for (std::size_t i = 0; i < it.size(); ++i) it[i] = static_cast<double>(i);
    trace.add("iteration", std::move(it));
    trace.add("F_W", res.trace);
    out.files.push_back(write_table(dir / ("objective_trace" + suffix), trace, cfg.format));
    const fs::path report = dir / ("structure_report" + suffix + ".json");
    write_json(report, structure_json(res, oc, cfg));
    out.files.push_back(report);
}

void require_surface(const ExperimentConfig& cfg, const char* cmd) {
    if (cfg.constraint != ConstraintKind::Surface) {
        throw ConfigError(std::string(cmd) + ": requires [constraint] kind = surface");
    }
}

}  // namespace

RadiusProfile build_profile(const ExperimentConfig& cfg, const Grid& grid) {
    const ProfileSpec& ps = cfg.profile;
    const double base = ps.radius > 0.0 ? ps.radius : cfg.a0;
    switch (ps.kind) {
        case ProfileKind::Constant: return RadiusProfile::constant(grid, base, cfg.a0);
        case ProfileKind::Cone: {
            RadiusProfile a{grid, VectorXd(grid.n_nodes()), cfg.a0};
            for (Index i = 0; i < grid.n_nodes(); ++i) {
                a.values[i] = base + (ps.tip_radius - base) * grid.node(i) / grid.length();
            }
            a.validate();
            return a;
        }
        case ProfileKind::Asm: return build_asm(ps.S, ps.m, cfg.a0, grid);
        case ProfileKind::Table: {
            RadiusProfile a{grid, VectorXd(grid.n_nodes()), cfg.a0};
            for (Index i = 0; i < grid.n_nodes(); ++i) {
                const double x = grid.node(i);
                const auto hi = std::upper_bound(ps.x.begin(), ps.x.end(), x);
                if (hi == ps.x.begin()) {
                    a.values[i] = ps.a.front();
                } else if (hi == ps.x.end()) {
                    a.values[i] = ps.a.back();
                } else {
                    const auto k = static_cast<std::size_t>(hi - ps.x.begin());
                    const double t = (x - ps.x[k - 1]) / (ps.x[k] - ps.x[k - 1]);
                    a.values[i] = ps.a[k - 1] + t * (ps.a[k] - ps.a[k - 1]);
                }
            }
            try {
                a.validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("[profile] table: ") + e.what());
            }
            return a;
        }
        case ProfileKind::Csv: {
            RadiusProfile a = read_profile_csv(ps.path, cfg.a0);
            if (!(a.grid == grid)) {
                throw ConfigError(ps.path + ": grid does not match length_mm and n_cells of the config");
            }
            return a;
        }
    }
    throw ConfigError("[profile] unknown kind");
}

OptimConfig optim_config(const ExperimentConfig& cfg, double M, bool uncapped) {
    OptimConfig oc;
    oc.a0 = cfg.a0;
    oc.M = M;
    oc.S0 = cfg.S0;
    oc.grid = Grid(cfg.length, cfg.n_cells);
    oc.params = cfg.params;
    oc.max_iters = cfg.max_iters;
    oc.tol = cfg.tol;
    oc.uncapped = uncapped;
    try {
        oc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return oc;
}

SuiteSettings suite_settings(const ExperimentConfig& cfg) {
    SuiteSettings s;
    s.convergence_cells = cfg.convergence_cells;
    s.seed = cfg.seed;
    s.a0 = cfg.a0;
    s.length = cfg.length;
    s.S0 = cfg.S0;
    s.params = cfg.params;
    if (!cfg.M_list.empty()) s.M_list = cfg.M_list;
    return s;
}

CommandResult cmd_solve(const ExperimentConfig& cfg) {
    const fs::path dir = prepare_out(cfg);
    const RadiusProfile a =
        cfg.profile.kind == ProfileKind::Csv ? read_profile_csv(cfg.profile.path, cfg.a0)
                                             : build_profile(cfg, Grid(cfg.length, cfg.n_cells));
    const Grid& grid = a.grid;
    const SurfaceMeasure b =
        cfg.profile.kind == ProfileKind::Asm ? build_bsm(cfg.profile.S, cfg.profile.m, cfg.a0, grid) : surface_density(a);
    const TemperatureField T = solve_temperature(a, b, cfg.params);
    const FluxReport flux = flux_report(a, b, cfg.params, T);

    CommandResult out;
    out.files.push_back(write_table(dir / "temperature", node_table(grid, "T_degC", T.temperatures()), cfg.format));
    Table profile = node_table(grid, "a_m", a.values);
    std::vector<double> b_nodes(b.density.data(), b.density.data() + b.density.size());
    b_nodes.push_back(std::numeric_limits<double>::quiet_NaN());  // b lives on the cell right of each node
    profile.add("b_m", std::move(b_nodes));
    out.files.push_back(write_table(dir / "profile", profile, cfg.format));

    json report;
    report["F_boundary_W"] = flux.F_boundary;
    report["F_integral_W"] = flux.F_integral;
    report["relative_gap"] = finite_or_null(flux.relative_gap);
    report["volume_m3"] = volume(a);
    report["surface_m2"] = surface(a);
    report["n_cells"] = grid.n_cells();
    if (cfg.profile.kind == ProfileKind::Asm) {
        const double limit = relaxed_limit(cfg.a0, cfg.profile.S, cfg.params, grid);
        report["relaxed_limit_W"] = limit;
        report["flux_over_relaxed_limit"] = flux.F_integral / limit;
        out.summary.push_back(line("F / relaxed limit = %.6f", flux.F_integral / limit));
    }
    write_json(dir / "flux_report.json", report);
    out.files.push_back(dir / "flux_report.json");
    out.summary.push_back(line("F_boundary = %.10g W, F_integral = %.10g W, gap = %.3g", flux.F_boundary,
                               flux.F_integral, flux.relative_gap));
    return out;
}

CommandResult cmd_optimize(const ExperimentConfig& cfg) {
    require_surface(cfg, "optimize");
    if (!cfg.uncapped && cfg.M_list.empty()) throw ConfigError("optimize: [constraint] needs M_mm or uncapped = true");
    const fs::path dir = prepare_out(cfg);
    const double M = cfg.uncapped ? std::numeric_limits<double>::infinity() : cfg.M_list.front();
    const OptimConfig oc = optim_config(cfg, M, cfg.uncapped);
    const OptimResult res = optimize(oc);
    CommandResult out;
    write_result(res, oc, cfg, dir, "", out);
    out.summary.push_back(line("objective = %.12g W after %.0f iterations (stationarity %.2e)", res.objective,
                               res.iterations, res.stationarity));
    if (!res.converged) out.summary.push_back("warning: optimizer stopped before reaching tol");
    return out;
}

CommandResult cmd_sweep(const ExperimentConfig& cfg) {
    require_surface(cfg, "sweep");
    if (cfg.M_list.empty() && !cfg.uncapped) throw ConfigError("sweep: [constraint] needs M_mm or uncapped = true");
    const fs::path dir = prepare_out(cfg);
    CommandResult out;
    json report;
    report["members"] = json::array();
    std::size_t index = 0;
    if (!cfg.M_list.empty()) {
        for (double M : cfg.M_list) optim_config(cfg, M, false);
        const SweepResult sweep = sweep_M(optim_config(cfg, cfg.M_list.front(), false), cfg.M_list);
        report["non_decreasing"] = sweep.non_decreasing;
        for (const auto& member : sweep.members) {
            const OptimConfig oc = optim_config(cfg, cfg.M_list[index], false);
            write_result(member, oc, cfg, dir, "_" + std::to_string(index), out);
            report["members"].push_back({{"index", index}, {"M_m", oc.M}, {"objective_W", member.objective},
                                         {"converged", member.converged}});
            out.summary.push_back(line("M = %.6g m: objective = %.12g W", oc.M, member.objective));
            ++index;
        }
    }
    if (cfg.uncapped) {
        const OptimConfig oc = optim_config(cfg, std::numeric_limits<double>::infinity(), true);
        const OptimResult res = optimize(oc);
        write_result(res, oc, cfg, dir, "_" + std::to_string(index), out);
        report["members"].push_back({{"index", index}, {"M_m", nullptr}, {"objective_W", res.objective},
                                     {"converged", res.converged}});
        out.summary.push_back(line("uncapped: objective = %.12g W", res.objective));
    }
    if (cfg.params.h.is_constant()) report["supremum_W"] = surface_supremum(cfg.a0, cfg.length, cfg.S0, cfg.params);
    write_json(dir / "sweep_report.json", report);
    out.files.push_back(dir / "sweep_report.json");
    return out;
}

CommandResult cmd_verify(const ExperimentConfig& cfg) {
    const fs::path dir = prepare_out(cfg);
    const auto results = run_suite(suite_settings(cfg));
    CommandResult out;
    json report;
    report["seed"] = cfg.seed;
    report["checks"] = json::array();
    bool all = true;
    for (const auto& r : results) {
        const bool ok = r.passed || r.skipped;
        all = all && ok;
        report["checks"].push_back({{"id", r.id},
                                    {"name", r.name},
                                    {"status", r.skipped ? "skipped" : r.passed ? "pass" : "fail"},
                                    {"measured", finite_or_null(r.measured)},
                                    {"threshold", finite_or_null(r.threshold)},
                                    {"detail", r.detail}});
        out.summary.push_back(std::string(r.skipped ? "[SKIP] " : r.passed ? "[PASS] " : "[FAIL] ") + r.id + ": " +
                              r.detail);
    }
    report["all_passed"] = all;
    // Both readings of the tip term of the generalized supremum, for the configured physics.
    json tip{{"with_pi_W", nullptr}, {"as_printed_W", nullptr}};
    if (cfg.S0 > cfg.a0 * cfg.length && cfg.params.h.attains_max_at_origin(cfg.length)) {
        const Grid grid(cfg.length, cfg.n_cells);
        tip["with_pi_W"] = generalized_supremum(cfg.a0, cfg.S0, cfg.params, grid, TipTerm::WithPi);
        tip["as_printed_W"] = generalized_supremum(cfg.a0, cfg.S0, cfg.params, grid, TipTerm::AsPrinted);
    }
    report["supremum_tip_term"] = tip;
    write_json(dir / "verify_report.json", report);
    out.files.push_back(dir / "verify_report.json");
    out.exit_code = all ? exit_ok : exit_verification;
    return out;
}

CommandResult cmd_sequence(const ExperimentConfig& cfg) {
    const fs::path dir = prepare_out(cfg);
    const Grid grid(cfg.length, cfg.n_cells);
    CommandResult out;
    json report;
    RadiusProfile a = RadiusProfile::constant(grid, cfg.a0);
    SurfaceMeasure b = SurfaceMeasure::constant(grid, cfg.a0, cfg.a0);
    switch (cfg.sequence.kind) {
        case SequenceKind::Asm: {
            const double S = cfg.sequence.S > 0.0 ? cfg.sequence.S : cfg.S0;
            const ArcSequence seq{S, cfg.sequence.m, cfg.a0, cfg.length};
            seq.validate();
            a = build_asm(S, cfg.sequence.m, cfg.a0, grid);
            b = build_bsm(S, cfg.sequence.m, cfg.a0, grid);
            report["kind"] = "asm";
            report["S_m2"] = S;
            report["m"] = cfg.sequence.m;
            report["plateau_m"] = seq.plateau();
            report["support_m"] = seq.support();
            break;
        }
        case SequenceKind::Bang: {
            require_surface(cfg, "sequence");
            if (cfg.M_list.empty()) throw ConfigError("sequence: bang profile needs [constraint] M_mm");
            const double M = cfg.M_list.front();
            optim_config(cfg, M, false);
            b = build_bang_b(M, cfg.S0, cfg.a0, grid);
            a = reconstruct_radius(b, resolved_intervals(b), cfg.a0);
            report["kind"] = "bang";
            report["M_m"] = M;
            report["x_M_m"] = bang_switch(M, cfg.S0, cfg.a0, cfg.length);
            break;
        }
        case SequenceKind::Volume: {
            if (cfg.constraint != ConstraintKind::Volume) {
                throw ConfigError("sequence: volume sequence needs [constraint] kind = volume");
            }
            VolumeSequenceOptions opts;
            if (cfg.params.h.is_constant()) opts.params = cfg.params;
            const auto member = build_volume_sequence(cfg.sequence.n, cfg.V0, cfg.a0, grid, opts);
            a = member.profile;
            b = member.density;
            report["kind"] = "volume";
            report["n"] = member.n;
            report["m"] = member.m;
            report["V0_m3"] = cfg.V0;
            break;
        }
    }
    report["volume_m3"] = volume(a);
    report["surface_m2"] = surface(a);
    report["density_total_m2"] = b.total();
    const double F = solve_flux(a, b, cfg.params);
    report["flux_W"] = F;
    out.files.push_back(write_table(dir / "sequence_profile", node_table(grid, "a_m", a.values), cfg.format));
    out.files.push_back(write_table(dir / "sequence_density", cell_table(b), cfg.format));
    write_json(dir / "sequence_report.json", report);
    out.files.push_back(dir / "sequence_report.json");
    out.summary.push_back(line("flux = %.12g W, surface = %.6g m^2, volume = %.6g m^3", F, surface(a), volume(a)));
    return out;
}

}  // namespace finopt
