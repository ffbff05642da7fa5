#include "finopt/functionals.hpp"

#include <algorithm>
#include <cmath>

namespace finopt {

namespace {

constexpr double pi = std::numbers::pi;

}  // namespace

double volume(const RadiusProfile& a) {
    a.validate();
    return a.midpoint_squares().sum() * a.grid.spacing();
}

double surface(const RadiusProfile& a) {
    a.validate();
    return surface_density(a).density_integral();
}

double heat_flux_boundary(const RadiusProfile& a, const SurfaceMeasure& b, const TemperatureField& T,
                          const PhysicalParams& p) {
    require_same_grid(a.grid, T.grid, "heat_flux_boundary");
    const auto sys = FiniteVolumeSystem::assemble(a, b, p);
    return p.k * pi * sys.inlet_flux(T.theta);
}

double heat_flux_boundary(const RadiusProfile& a, const TemperatureField& T, const PhysicalParams& p) {
    return heat_flux_boundary(a, surface_density(a), T, p);
}

double heat_flux_relaxed(const RadiusProfile& a, const SurfaceMeasure& b, const PhysicalParams& p,
                         const TemperatureField& T) {
    require_same_grid(a.grid, T.grid, "heat_flux_relaxed");
    const auto sys = FiniteVolumeSystem::assemble(a, b, p);
    return p.k * pi * sys.total_sink(T.theta);
}

FluxReport flux_report(const RadiusProfile& a, const SurfaceMeasure& b, const PhysicalParams& p,
                       const TemperatureField& T) {
    require_same_grid(a.grid, T.grid, "flux_report");
    const auto sys = FiniteVolumeSystem::assemble(a, b, p);
    FluxReport r{p.k * pi * sys.inlet_flux(T.theta), p.k * pi * sys.total_sink(T.theta), 0.0};
    const double scale = std::max(std::abs(r.F_boundary), std::abs(r.F_integral));
    r.relative_gap = scale > 0.0 ? std::abs(r.F_boundary - r.F_integral) / scale : 0.0;
    return r;
}

double solve_flux(const RadiusProfile& a, const SurfaceMeasure& b, const PhysicalParams& p) {
    const auto sys = FiniteVolumeSystem::assemble(a, b, p);
    return p.k * pi * sys.total_sink(sys.solve(p.delta_T()));
}

double solve_flux(const RadiusProfile& a, const PhysicalParams& p) { return solve_flux(a, surface_density(a), p); }

double flux_change(const RadiusProfile& a, const SurfaceMeasure& b, const SurfaceMeasure& b_new,
                   const PhysicalParams& p) {
    require_same_grid(b.grid, b_new.grid, "flux_change");
    const auto sys = FiniteVolumeSystem::assemble(a, b, p);
    const auto sys_new = FiniteVolumeSystem::assemble(a, b_new, p);
    const VectorXd theta = sys.solve(p.delta_T());
    const VectorXd dR = sys_new.reaction - sys.reaction;
    // A_new dtheta = -(A_new - A) theta with dtheta(0) = 0.
    const VectorXd dtheta = sys_new.solve_loaded(-dR.cwiseProduct(theta));
    const Index n = a.grid.n_cells();
    return p.k * pi * (dR.dot(theta + dtheta) + sys.reaction.dot(dtheta) + sys.tip * dtheta[n]);
}

SurfaceMeasure swap_perturbation(const SurfaceMeasure& b, double x0, double c, double eps) {
    const Grid& g = b.grid;
    if (!(eps > 0.0 && eps <= x0 - 0.5 * eps && x0 + 0.5 * eps <= g.length())) {
        throw std::invalid_argument("swap_perturbation: need 0 < eps, [0, eps] left of the window around x0, window inside [0, l]");
    }
    SurfaceMeasure out = b;
    const double h = g.spacing();
    const double lo = x0 - 0.5 * eps, hi = x0 + 0.5 * eps;
    for (Index j = 0; j < g.n_cells(); ++j) {
        const double x_l = g.node(j), x_r = g.node(j + 1);
        const double gain = std::max(0.0, std::min(x_r, eps) - x_l);
        const double loss = std::max(0.0, std::min(x_r, hi) - std::max(x_l, lo));
        out.density[j] += c * (gain - loss) / h;
    }
    return out;
}

double surface_supremum(double a0, double length, double S0, const PhysicalParams& p) {
    if (!p.h.is_constant()) {
        throw std::invalid_argument("surface_supremum: requires a constant convective coefficient");
    }
    if (!(S0 > a0 * length)) {
        throw std::invalid_argument("surface_supremum: S0 must exceed a0 * l");
    }
    const double beta = p.beta(0.0);
    const double gamma = compute_gamma(a0, length, beta, p.beta_r());
    return p.k * pi * beta * p.delta_T() * (std::pow(a0, 1.5) * gamma / std::sqrt(beta) + (S0 - a0 * length));
}

double generalized_supremum(double a0, double S0, const PhysicalParams& p, const Grid& grid, TipTerm tip) {
    const double length = grid.length();
    if (!(S0 > a0 * length)) {
        throw std::invalid_argument("generalized_supremum: S0 must exceed a0 * l");
    }
    if (!p.h.attains_max_at_origin(length)) {
        throw HypothesisViolated("generalized_supremum: beta does not attain its maximum at x = 0");
    }
    const auto a = RadiusProfile::constant(grid, a0);
    const auto b = SurfaceMeasure::constant(grid, a0, a0);
    const auto sys = FiniteVolumeSystem::assemble(a, b, p);
    const VectorXd theta = sys.solve(p.delta_T());

    const Index n = grid.n_cells();
    const VectorXd theta_mid = 0.5 * (theta.head(n) + theta.tail(n));
    const double lateral = a0 * sys.cell_beta.dot(theta_mid) * grid.spacing();
    const double excess = (S0 - a0 * length) * p.beta(0.0) * p.delta_T();
    const double tip_value = p.beta_r() * a0 * a0 * theta[n];
    const double tip_factor = tip == TipTerm::WithPi ? pi : 1.0;
    return p.k * pi * (lateral + excess) + p.k * tip_factor * tip_value;
}

double directional_derivative(const TemperatureField& T, const PhysicalParams& p, double x0, double c) {
    if (!(x0 > 0.0 && x0 < T.grid.length())) {
        throw std::invalid_argument("directional_derivative: x0 must lie strictly inside (0, l)");
    }
    const double dT = p.delta_T();
    if (dT == 0.0) return 0.0;
    const double theta0 = T.theta_at(x0);
    return p.k * pi * c * (p.beta(0.0) * dT * dT - p.beta(x0) * theta0 * theta0) / dT;
}

double directional_derivative(const RadiusProfile& a, const SurfaceMeasure& b, const PhysicalParams& p,
                              double x0, double c) {
    return directional_derivative(solve_temperature(a, b, p), p, x0, c);
}

VectorXd gradient_density(const TemperatureField& T, const PhysicalParams& p) {
    const double dT = p.delta_T();
    VectorXd g = VectorXd::Zero(T.grid.n_nodes());
    if (dT == 0.0) return g;
    for (Index i = 0; i < g.size(); ++i) {
        g[i] = p.k * pi * p.beta(T.grid.node(i)) * T.theta[i] * T.theta[i] / dT;
    }
    return g;
}

VectorXd flux_gradient(const TemperatureField& T, const PhysicalParams& p) {
    const Grid& g = T.grid;
    const Index n = g.n_cells();
    const double dT = p.delta_T();
    VectorXd grad = VectorXd::Zero(n);
    if (dT == 0.0) return grad;
    const double scale = p.k * pi * g.spacing() / (2.0 * dT);
    for (Index j = 0; j < n; ++j) {
        const double t0 = T.theta[j], t1 = T.theta[j + 1];
        grad[j] = scale * p.beta(g.midpoint(j)) * (t0 * t0 + t1 * t1);
    }
    return grad;
}

double surface_radius_bound(double S0, double length) { return std::sqrt(S0 * S0 / (length * length) + 4.0 * S0); }

}  // namespace finopt
