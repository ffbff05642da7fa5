#pragma once

#include <numbers>
#include <stdexcept>

#include "finopt/core_solver.hpp"

namespace finopt {

/// A theorem hypothesis on the data does not hold (e.g. beta not maximal at x = 0).
class HypothesisViolated : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct FluxReport {
    double F_boundary;  // W, -k pi a(0)^2 T'(0) through the discrete inlet balance
    double F_integral;  // W, k pi (<beta b, T - T_inf> + beta_r a(l)^2 (T(l) - T_inf))
    double relative_gap;
};

/// Integral of a^2 (multiply by pi for the physical volume).
double volume(const RadiusProfile& a);
/// Integral of a sqrt(1 + a'^2) (multiply by 2 pi for the lateral area).
double surface(const RadiusProfile& a);

/// Inlet heat flux of a classical profile, T solving the state equation for (a, b(a)).
double heat_flux_boundary(const RadiusProfile& a, const TemperatureField& T, const PhysicalParams& p);
/// Same, for a measure-valued surface b.
double heat_flux_boundary(const RadiusProfile& a, const SurfaceMeasure& b, const TemperatureField& T,
                          const PhysicalParams& p);
/// Relaxed functional k pi beta <b, T - T_inf> + k pi beta_r a(l)^2 (T(l) - T_inf).
double heat_flux_relaxed(const RadiusProfile& a, const SurfaceMeasure& b, const PhysicalParams& p,
                         const TemperatureField& T);

FluxReport flux_report(const RadiusProfile& a, const SurfaceMeasure& b, const PhysicalParams& p,
                       const TemperatureField& T);

/// Solve the state for (a, b) and return the relaxed flux.
double solve_flux(const RadiusProfile& a, const SurfaceMeasure& b, const PhysicalParams& p);
/// Classical profile: b = a sqrt(1 + a'^2).
double solve_flux(const RadiusProfile& a, const PhysicalParams& p);

/// F(a, b_new) - F(a, b) from a direct solve for the temperature change, free of the
/// cancellation in subtracting two nearly equal fluxes.
double flux_change(const RadiusProfile& a, const SurfaceMeasure& b, const SurfaceMeasure& b_new,
                   const PhysicalParams& p);

/// b + c (chi_[0,eps] - chi_[x0-eps/2, x0+eps/2]) as exact cell averages (atoms unchanged).
SurfaceMeasure swap_perturbation(const SurfaceMeasure& b, double x0, double c, double eps);

/// k pi beta (T_d - T_inf) (a0^{3/2} gamma / sqrt(beta) + S0 - a0 l), constant beta.
double surface_supremum(double a0, double length, double S0, const PhysicalParams& p);

enum class TipTerm {
    WithPi,     // k pi beta_r a0^2 (T(l) - T_inf), consistent with the relaxed functional
    AsPrinted,  // k beta_r a0^2 (T(l) - T_inf)
};

/// Supremum under the surface constraint for x-dependent beta with max at x = 0:
/// k pi a0 int beta (T - T_inf) + k pi (S0 - a0 l) beta(0) (T_d - T_inf) + tip term,
/// T solving the state with a = b = a0 on `grid`. Throws HypothesisViolated otherwise.
double generalized_supremum(double a0, double S0, const PhysicalParams& p, const Grid& grid,
                            TipTerm tip = TipTerm::WithPi);

/// Limit of (F(a_eps) - F(a)) / eps for b_eps = b + c (chi_[0,eps] - chi_[x0-eps/2, x0+eps/2]):
/// k pi c (beta(0) (T_d - T_inf)^2 - beta(x0) (T(x0) - T_inf)^2) / (T_d - T_inf).
double directional_derivative(const RadiusProfile& a, const SurfaceMeasure& b, const PhysicalParams& p,
                              double x0, double c);
double directional_derivative(const TemperatureField& T, const PhysicalParams& p, double x0, double c);

/// Pointwise gradient density k pi beta(x_i) (T_i - T_inf)^2 / (T_d - T_inf) at the nodes.
VectorXd gradient_density(const TemperatureField& T, const PhysicalParams& p);

/// Exact partial derivatives of the discrete relaxed flux with respect to each cell density:
/// k pi beta_j h (theta_j^2 + theta_{j+1}^2) / (2 (T_d - T_inf)).
VectorXd flux_gradient(const TemperatureField& T, const PhysicalParams& p);

/// Upper bound sqrt(S0^2 / l^2 + 4 S0) on max a over profiles with surface(a) <= S0.
double surface_radius_bound(double S0, double length);

}  // namespace finopt
