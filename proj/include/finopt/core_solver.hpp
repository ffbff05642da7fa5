#pragma once

#include <stdexcept>

#include "finopt/closed_form.hpp"
#include "finopt/fields.hpp"
#include "finopt/physics.hpp"

namespace finopt {

/// Raised when a discrete system cannot be solved (non-positive pivot, non-finite result).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Finite-volume discretization of (a^2 theta')' = beta b theta with theta(0) = T_d - T_inf and
/// a^2 theta'(l) = -beta_r a(l)^2 theta(l). Node i owns the control volume
/// [x_i - h/2, x_i + h/2] clipped to [0, l]; cell j couples nodes j and j+1.
struct FiniteVolumeSystem {
    Grid grid;
    VectorXd conductance;  // a^2 / h per cell
    VectorXd reaction;     // integral of beta b over each node's control volume, incl. atoms
    double tip;            // beta_r a(l)^2
    VectorXd cell_beta;    // beta at cell midpoints

    static FiniteVolumeSystem assemble(const RadiusProfile& a, const SurfaceMeasure& b, const PhysicalParams& p);

    /// Solves for theta given theta(0); node 0 is the Dirichlet node.
    VectorXd solve(double theta0) const;
    /// Solves the homogeneous-Dirichlet problem with a nodal load vector (load[0] ignored).
    VectorXd solve_loaded(const VectorXd& load) const;

    /// Net flux entering at x = 0 read off node 0's balance, conservative by construction.
    double inlet_flux(const VectorXd& theta) const;
    /// Sum of every reaction sink plus the tip sink.
    double total_sink(const VectorXd& theta) const;
};

/// Node weights of an atom at `position`: its control volume's node, split evenly on a CV face.
struct AtomLump {
    Index first;
    double first_weight;
    Index second;
    double second_weight;
};
AtomLump lump_atom(const Grid& grid, double position);

TemperatureField solve_temperature(const RadiusProfile& a, const SurfaceMeasure& b, const PhysicalParams& p);
/// Classical fin: b = a sqrt(1 + a'^2).
TemperatureField solve_temperature(const RadiusProfile& a, const PhysicalParams& p);

/// Closed-form temperature of the constant-radius fin (constant h only).
double analytic_theta_constant(double a0, double length, const PhysicalParams& p, double x);

/// Linearized response to moving c * eps of surface away from x0: same operator, zero Dirichlet
/// data, point load beta(x0) c theta(x0) on the control volume(s) containing x0.
LinearizedField solve_linearized(const RadiusProfile& a, const SurfaceMeasure& b, const PhysicalParams& p,
                                 const TemperatureField& T, double x0, double c);

}  // namespace finopt
