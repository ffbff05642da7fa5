#include "finopt/core_solver.hpp"

#include <cmath>
#include <string>

#include "finopt/tridiagonal.hpp"

namespace finopt {

AtomLump lump_atom(const Grid& grid, double position) {
    const double h = grid.spacing();
    const double s = position / h;
    const double nearest = std::round(s);
    auto i = static_cast<Index>(nearest);
    if (i > grid.n_cells()) i = grid.n_cells();
    // Exactly on a control-volume face (a cell midpoint): share between both nodes.
    if (std::abs(s - std::floor(s) - 0.5) == 0.0) {
        const auto left = static_cast<Index>(std::floor(s));
        return {left, 0.5, left + 1, 0.5};
    }
    return {i, 1.0, i, 0.0};
}

FiniteVolumeSystem FiniteVolumeSystem::assemble(const RadiusProfile& a, const SurfaceMeasure& b,
                                                const PhysicalParams& p) {
    a.validate();
    b.validate();
    require_same_grid(a.grid, b.grid, "solve_temperature");
    p.validate(a.grid.length());

    const Grid& g = a.grid;
    const Index n = g.n_cells();
    const double h = g.spacing();

    FiniteVolumeSystem sys{g, a.midpoint_squares() / h, VectorXd::Zero(g.n_nodes()),
                           p.beta_r() * a.values[n] * a.values[n], VectorXd(n)};
    for (Index j = 0; j < n; ++j) {
        sys.cell_beta[j] = p.beta(g.midpoint(j));
        const double half = 0.5 * sys.cell_beta[j] * b.density[j] * h;
        sys.reaction[j] += half;
        sys.reaction[j + 1] += half;
    }
    for (const auto& atom : b.atoms) {
        const AtomLump lump = lump_atom(g, atom.position);
        const double w = p.beta(atom.position) * atom.mass;
        sys.reaction[lump.first] += lump.first_weight * w;
        sys.reaction[lump.second] += lump.second_weight * w;
    }
    return sys;
}

VectorXd FiniteVolumeSystem::solve_loaded(const VectorXd& load) const {
    const Index n = grid.n_cells();
    // Unknown k is node k + 1; the tip sink joins the last node's reaction. Eliminated in extended
    // precision so that the rounded theta satisfies every node balance to about eps (a^2 / h) theta.
    VectorXd r = reaction.tail(n);
    r[n - 1] += tip;
    const auto x = solve_conduction_chain<long double>(conductance, r, VectorXd(load.tail(n)));
    if (!x) throw NumericalError("solve_temperature: singular conduction system (check a >= a0 > 0, beta > 0)");
    VectorXd theta(grid.n_nodes());
    theta[0] = 0.0;
    theta.tail(n) = x->cast<double>();
    if (!theta.allFinite()) throw NumericalError("solve_temperature: non-finite temperature");
    return theta;
}

VectorXd FiniteVolumeSystem::solve(double theta0) const {
    VectorXd load = VectorXd::Zero(grid.n_nodes());
    load[1] = conductance[0] * theta0;
    VectorXd theta = solve_loaded(load);
    theta[0] = theta0;
    return theta;
}

double FiniteVolumeSystem::inlet_flux(const VectorXd& theta) const {
    return conductance[0] * (theta[0] - theta[1]) + reaction[0] * theta[0];
}

double FiniteVolumeSystem::total_sink(const VectorXd& theta) const {
    return reaction.dot(theta) + tip * theta[grid.n_cells()];
}

TemperatureField solve_temperature(const RadiusProfile& a, const SurfaceMeasure& b, const PhysicalParams& p) {
    const auto sys = FiniteVolumeSystem::assemble(a, b, p);
    return TemperatureField{a.grid, sys.solve(p.delta_T()), p.T_inf};
}

TemperatureField solve_temperature(const RadiusProfile& a, const PhysicalParams& p) {
    return solve_temperature(a, surface_density(a), p);
}

double analytic_theta_constant(double a0, double length, const PhysicalParams& p, double x) {
    if (!p.h.is_constant()) {
        throw std::invalid_argument("analytic_theta_constant: requires a constant convective coefficient");
    }
    return p.T_inf + p.delta_T() * normalized_theta_constant(a0, length, p.beta(0.0), p.beta_r(), x);
}

LinearizedField solve_linearized(const RadiusProfile& a, const SurfaceMeasure& b, const PhysicalParams& p,
                                 const TemperatureField& T, double x0, double c) {
    const Grid& g = a.grid;
    if (!(x0 > 0.0 && x0 < g.length())) {
        throw std::invalid_argument("solve_linearized: x0 must lie strictly inside (0, l)");
    }
    if (!(c > 0.0)) throw std::invalid_argument("solve_linearized: c must be > 0");
    require_same_grid(g, T.grid, "solve_linearized");

    const auto sys = FiniteVolumeSystem::assemble(a, b, p);
    const double jump = p.beta(x0) * c * T.theta_at(x0);
    VectorXd load = VectorXd::Zero(g.n_nodes());
    const AtomLump lump = lump_atom(g, x0);
    load[lump.first] += lump.first_weight * jump;
    load[lump.second] += lump.second_weight * jump;
    return LinearizedField{g, sys.solve_loaded(load), x0, jump};
}

}  // namespace finopt
