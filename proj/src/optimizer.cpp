#include "finopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>
#include <string>

#include "finopt/core_solver.hpp"
#include "finopt/functionals.hpp"
#include "finopt/sequences.hpp"

namespace finopt {

namespace {

using Eigen::MatrixXd;

constexpr double eps = std::numeric_limits<double>::epsilon();

struct Evaluation {
    double F;
    VectorXd grad;
    VectorXd theta;
};

Evaluation evaluate(const SurfaceMeasure& b, const PhysicalParams& p) {
    const auto a = RadiusProfile::constant(b.grid, b.floor);
    const auto sys = FiniteVolumeSystem::assemble(a, b, p);
    const TemperatureField T{b.grid, sys.solve(p.delta_T()), p.T_inf};
    return {p.k * std::numbers::pi * sys.total_sink(T.theta), flux_gradient(T, p), T.theta};
}

/// Exact Hessian of the relaxed flux restricted to the cells in `cols` (negative semidefinite).
MatrixXd free_hessian(const SurfaceMeasure& b, const PhysicalParams& p, const VectorXd& theta,
                      const std::vector<Index>& cols) {
    const Grid& g = b.grid;
    const double h = g.spacing();
    const auto sys = FiniteVolumeSystem::assemble(RadiusProfile::constant(g, b.floor), b, p);
    const double scale = p.k * std::numbers::pi * h / p.delta_T();
    const auto m = static_cast<Index>(cols.size());
    MatrixXd H(m, m);
    VectorXd load = VectorXd::Zero(g.n_nodes());
    for (Index c = 0; c < m; ++c) {
        const Index k = cols[static_cast<std::size_t>(c)];
        const double w = 0.5 * sys.cell_beta[k] * h;
        load.setZero();
        load[k] = -w * theta[k];
        load[k + 1] = -w * theta[k + 1];
        const VectorXd u = sys.solve_loaded(load);
        for (Index r = 0; r < m; ++r) {
            const Index j = cols[static_cast<std::size_t>(r)];
            H(r, c) = scale * sys.cell_beta[j] * (theta[j] * u[j] + theta[j + 1] * u[j + 1]);
        }
    }
    return 0.5 * (H + H.transpose());
}

}  // namespace

void OptimConfig::validate() const {
    if (!(a0 > 0.0)) throw std::invalid_argument("optimize: a0 must be > 0");
    const double length = grid.length();
    params.validate(length);
    if (!(S0 >= a0 * length)) throw std::invalid_argument("optimize: S0 must be >= a0 * l");
    if (!uncapped) {
        if (!(M > a0)) throw std::invalid_argument("optimize: cap M must exceed a0");
        const double x_M = (S0 - a0 * length) / (M - a0);
        if (x_M > length) {
            throw std::invalid_argument("optimize: infeasible cap, x_M = " + std::to_string(x_M) + " exceeds l");
        }
    }
    if (max_iters < 1) throw std::invalid_argument("optimize: max_iters must be >= 1");
    if (!(armijo_sigma > 0.0 && armijo_sigma < 1.0)) throw std::invalid_argument("optimize: sigma must be in (0, 1)");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw std::invalid_argument("optimize: backtrack must be in (0, 1)");
    if (!(tol >= 0.0)) throw std::invalid_argument("optimize: tol must be >= 0");
    if (newton_max_free < 0) throw std::invalid_argument("optimize: newton_max_free must be >= 0");
}

VectorXd project_box_budget(const VectorXd& z, double lower, double upper, double h, double budget) {
    if (!(upper >= lower)) throw std::invalid_argument("project_box_budget: empty box");
    if (h * lower * static_cast<double>(z.size()) > budget * (1.0 + 1e-14)) {
        throw std::invalid_argument("project_box_budget: budget below the floor mass");
    }
    auto clip = [&](double mu) { return (z.array() - mu).max(lower).min(upper).matrix().eval(); };
    VectorXd y = clip(0.0);
    if (h * y.sum() <= budget) return y;

    // h sum clip(z - mu) is non-increasing in mu; find the root by bisection.
    double lo = 0.0, hi = z.maxCoeff() - lower;
    for (int it = 0; it < 200 && hi - lo > eps * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (h * clip(mid).sum() > budget ? lo : hi) = mid;
    }
    // Exact shift on the free set of the bracket, kept if the free set does not change.
    double mu = hi;
    const VectorXd y_hi = clip(hi);
    double fixed = 0.0, free_sum = 0.0;
    Index n_free = 0;
    for (Index i = 0; i < z.size(); ++i) {
        if (y_hi[i] > lower && y_hi[i] < upper) {
            free_sum += z[i];
            ++n_free;
        } else {
            fixed += y_hi[i];
        }
    }
    if (n_free > 0) {
        const double exact = (free_sum + fixed - budget / h) / static_cast<double>(n_free);
        if (exact >= lo && exact <= hi && h * clip(exact).sum() <= budget * (1.0 + 4.0 * eps)) mu = exact;
    }
    y = clip(mu);
    return y;
}

double relaxed_objective(const SurfaceMeasure& b, const PhysicalParams& p) { return evaluate(b, p).F; }

OptimResult optimize(const OptimConfig& cfg) {
    cfg.validate();
    const Grid& grid = cfg.grid;
    const double length = grid.length();
    const double h = grid.spacing();
    const double upper = cfg.cap();
    auto project = [&](const VectorXd& z) { return project_box_budget(z, cfg.a0, upper, h, cfg.S0); };

    SurfaceMeasure b{grid, project(VectorXd::Constant(grid.n_cells(), cfg.a0 + (cfg.S0 - cfg.a0 * length) / length)),
                     {}, cfg.a0};
    Evaluation cur = evaluate(b, cfg.params);

    // Reference step: moves the largest gradient component across the admissible range.
    const double range = cfg.uncapped ? cfg.S0 / length : cfg.M - cfg.a0;
    const double g_scale0 = cur.grad.cwiseAbs().maxCoeff();
    const double tau = g_scale0 > 0.0 ? range / g_scale0 : 1.0;

    auto stationarity = [&](const SurfaceMeasure& x, const VectorXd& g) {
        const double scale = g.cwiseAbs().maxCoeff();
        if (scale == 0.0) return 0.0;
        return ((project(x.density + tau * g) - x.density) / tau).cwiseAbs().maxCoeff() / scale;
    };

    std::vector<double> trace{cur.F};
    double step = tau;
    double stat = stationarity(b, cur.grad);
    bool converged = stat <= cfg.tol;

    // Equality-constrained Newton step on the cells a long projected step leaves strictly inside
    // the box. Singular arcs have near-null curvature that gradient steps resolve only slowly.
    auto newton_step = [&]() {
        const VectorXd probe = project(b.density + tau * cur.grad);
        std::vector<Index> cols;
        for (Index j = 0; j < grid.n_cells(); ++j) {
            if (probe[j] > cfg.a0 * (1.0 + 1e-12) && probe[j] < upper * (1.0 - 1e-12)) cols.push_back(j);
        }
        if (cols.empty() || static_cast<int>(cols.size()) > cfg.newton_max_free) return false;
        const auto m = static_cast<Index>(cols.size());
        MatrixXd N = -free_hessian(b, cfg.params, cur.theta, cols);
        N.diagonal().array() += 1e-12 * N.diagonal().cwiseAbs().maxCoeff() + std::numeric_limits<double>::min();
        const Eigen::LLT<MatrixXd> llt(N);
        if (llt.info() != Eigen::Success) return false;
        VectorXd gF(m);
        for (Index r = 0; r < m; ++r) gF[r] = cur.grad[cols[static_cast<std::size_t>(r)]];
        VectorXd d = llt.solve(gF);
        if (h * b.density.sum() >= cfg.S0 * (1.0 - 1e-12)) {
            const VectorXd e = llt.solve(VectorXd::Ones(m));
            d -= (d.sum() / e.sum()) * e;
        }
        VectorXd D = VectorXd::Zero(grid.n_cells());
        for (Index r = 0; r < m; ++r) D[cols[static_cast<std::size_t>(r)]] = d[r];

        SurfaceMeasure trial = b;
        for (int bt = 0; bt < 40; ++bt) {
            trial.density = project(b.density + std::ldexp(1.0, -bt) * D);
            Evaluation next = evaluate(trial, cfg.params);
            if (next.F < cur.F - 4.0 * eps * std::abs(cur.F)) continue;
            const double next_stat = stationarity(trial, next.grad);
            if (next.F <= cur.F && next_stat >= stat) continue;
            b = trial;
            cur = std::move(next);
            trace.push_back(cur.F);
            stat = next_stat;
            converged = stat <= cfg.tol;
            return true;
        }
        return false;
    };

    int iter = 0;
    while (!converged && iter < cfg.max_iters) {
        ++iter;
        bool accepted = false;
        SurfaceMeasure trial = b;
        Evaluation next;
        double s = step;
        for (int bt = 0; bt < 200; ++bt, s *= cfg.backtrack) {
            trial.density = project(b.density + s * cur.grad);
            const VectorXd d = trial.density - b.density;
            const double predicted = cur.grad.dot(d);
            if (predicted <= 0.0) break;  // projection left nothing to gain along this direction
            next = evaluate(trial, cfg.params);
            if (next.F >= cur.F && next.F - cur.F >= cfg.armijo_sigma * predicted - 8.0 * eps * std::abs(cur.F)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!newton_step()) break;
            step = tau;
            continue;
        }

        // Barzilai-Borwein trial step for the next iteration (concave objective: s'y < 0). Very long
        // steps are legitimate: the projection turns them into the bang-bang vertex of the linearization.
        const VectorXd ds = trial.density - b.density;
        const VectorXd dg = next.grad - cur.grad;
        const double sy = ds.dot(dg);
        step = sy < 0.0 ? std::clamp(-ds.squaredNorm() / sy, 1e-8 * tau, 1e30 * tau) : std::min(4.0 * s, 1e30 * tau);

        b = std::move(trial);
        cur = std::move(next);
        trace.push_back(cur.F);
        stat = stationarity(b, cur.grad);
        converged = stat <= cfg.tol;
        if (!converged) newton_step();
    }

    OptimResult res{b, RadiusProfile::constant(grid, cfg.a0), cur.F, 0.0, {}, std::move(trace), cur.grad,
                    stat, iter, converged, {}};
    const double tight = 1e-12;
    Index last_excess = -1;
    for (Index j = 0; j < grid.n_cells(); ++j) {
        const double v = b.density[j];
        CellState state = CellState::Free;
        if (v <= cfg.a0 * (1.0 + tight)) {
            state = CellState::Lower;
        } else if (!cfg.uncapped && v >= cfg.M * (1.0 - tight)) {
            state = CellState::Upper;
        }
        if (state != CellState::Lower) last_excess = j;
        res.active_set.push_back(state);
    }
    res.switch_estimate = cfg.uncapped ? grid.node(last_excess + 1)
                                       : verify_bang_structure(b, cur.F, cfg).switch_equivalent;
    try {
        res.a_opt = reconstruct_radius(b, resolved_intervals(b), cfg.a0);
    } catch (const std::exception& e) {
        res.reconstruction_error = e.what();
    }
    return res;
}

BangReport verify_bang_structure(const SurfaceMeasure& b, double objective, const OptimConfig& cfg) {
    if (cfg.uncapped) throw std::invalid_argument("verify_bang_structure: needs a finite cap M");
    const Grid& grid = b.grid;
    const double h = grid.spacing();
    const double rel = 1e-9;
    BangReport r{};
    r.x_M = bang_switch(cfg.M, cfg.S0, cfg.a0, grid.length());
    Index last_upper = -1;
    for (Index j = 0; j < grid.n_cells(); ++j) {
        const double v = b.density[j];
        if (v >= cfg.M * (1.0 - rel)) {
            last_upper = j;
        } else if (v > cfg.a0 * (1.0 + rel)) {
            ++r.intermediate_cells;
        }
    }
    r.switch_location = grid.node(last_upper + 1);
    r.switch_equivalent = r.switch_location;
    if (last_upper + 1 < grid.n_cells()) {
        r.switch_equivalent += (b.density[last_upper + 1] - cfg.a0) / (cfg.M - cfg.a0) * h;
    }
    r.switch_error_cells = std::abs(r.switch_location - r.x_M) / h;
    r.objective = objective;
    r.bang_objective = relaxed_objective(build_bang_b(cfg.M, cfg.S0, cfg.a0, grid), cfg.params);
    r.relative_gap = std::abs(r.objective - r.bang_objective) / r.bang_objective;
    return r;
}

BangReport verify_bang_structure(const OptimResult& res, const OptimConfig& cfg) {
    return verify_bang_structure(res.b_opt, res.objective, cfg);
}

KktReport check_kkt(const OptimResult& res, const OptimConfig& cfg) {
    const VectorXd& g = res.gradient;
    const double scale = g.cwiseAbs().maxCoeff();
    const bool budget_active = res.b_opt.total() >= cfg.S0 * (1.0 - 1e-12);
    double lo_max = -std::numeric_limits<double>::infinity(), up_min = std::numeric_limits<double>::infinity();
    std::vector<double> free;
    for (std::size_t j = 0; j < res.active_set.size(); ++j) {
        const double gj = g[static_cast<Index>(j)];
        switch (res.active_set[j]) {
            case CellState::Lower: lo_max = std::max(lo_max, gj); break;
            case CellState::Upper: up_min = std::min(up_min, gj); break;
            case CellState::Free: free.push_back(gj); break;
        }
    }
    double lambda = 0.0;
    if (budget_active) {
        if (!free.empty()) {
            std::nth_element(free.begin(), free.begin() + static_cast<long>(free.size() / 2), free.end());
            lambda = free[free.size() / 2];
        } else if (std::isfinite(lo_max) && std::isfinite(up_min)) {
            lambda = 0.5 * (lo_max + up_min);
        } else {
            lambda = std::isfinite(lo_max) ? lo_max : up_min;
        }
    }
    double violation = 0.0;
    for (std::size_t j = 0; j < res.active_set.size(); ++j) {
        const double gj = g[static_cast<Index>(j)];
        switch (res.active_set[j]) {
            case CellState::Lower: violation = std::max(violation, gj - lambda); break;
            case CellState::Upper: violation = std::max(violation, lambda - gj); break;
            case CellState::Free: violation = std::max(violation, std::abs(gj - lambda)); break;
        }
    }
    return {lambda, scale > 0.0 ? violation / scale : 0.0};
}

double excess_fraction(const SurfaceMeasure& b, double x_lo, double x_hi) {
    const Grid& grid = b.grid;
    const double h = grid.spacing();
    double inside = 0.0, total = 0.0;
    for (Index j = 0; j < grid.n_cells(); ++j) {
        const double mass = (b.density[j] - b.floor) * h;
        total += mass;
        const double overlap = std::min(grid.node(j + 1), x_hi) - std::max(grid.node(j), x_lo);
        if (overlap > 0.0) inside += mass * overlap / h;
    }
    for (const auto& atom : b.atoms) {
        total += atom.mass;
        if (atom.position >= x_lo && atom.position <= x_hi) inside += atom.mass;
    }
    return total > 0.0 ? inside / total : 0.0;
}

SweepResult sweep_M(const OptimConfig& cfg, const std::vector<double>& M_list) {
    if (M_list.empty()) throw std::invalid_argument("sweep_M: empty M list");
    for (std::size_t i = 1; i < M_list.size(); ++i) {
        if (!(M_list[i] > M_list[i - 1])) throw std::invalid_argument("sweep_M: M list must be increasing");
    }
    std::vector<OptimConfig> configs;
    for (double M : M_list) {
        OptimConfig c = cfg;
        c.M = M;
        c.uncapped = false;
        c.validate();
        configs.push_back(std::move(c));
    }
    std::vector<std::future<OptimResult>> jobs;
    for (const auto& c : configs) jobs.push_back(std::async(std::launch::async, [&c] { return optimize(c); }));

    SweepResult out{M_list, {}, true};
    for (auto& job : jobs) out.members.push_back(job.get());
    for (std::size_t i = 1; i < out.members.size(); ++i) {
        const double prev = out.members[i - 1].objective;
        if (out.members[i].objective < prev - 1e-12 * std::abs(prev)) out.non_decreasing = false;
    }
    return out;
}

const char* to_string(CellState s) {
    switch (s) {
        case CellState::Lower: return "lower";
        case CellState::Free: return "free";
        case CellState::Upper: return "upper";
    }
    return "?";
}

}  // namespace finopt
