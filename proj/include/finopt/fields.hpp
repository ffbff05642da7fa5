#pragma once

#include <vector>

#include "finopt/grid.hpp"

namespace finopt {

/// Nodal radius a(x_i) >= a0.
struct RadiusProfile {
    Grid grid;
    VectorXd values;  // n_nodes, meters
    double floor;     // a0, meters

    static RadiusProfile constant(const Grid& grid, double a0);
    static RadiusProfile constant(const Grid& grid, double value, double a0);

    /// a^2 at cell midpoints from the average of the two nodal radii.
    VectorXd midpoint_squares() const;
    /// Forward difference (a_{j+1} - a_j) / h, i.e. the centred slope at midpoint j.
    VectorXd midpoint_slopes() const;

    /// Throws std::invalid_argument on wrong size, non-finite values or a_i < a0.
    void validate() const;
};

/// Dirac atom of a surface measure: mass has units of m * m (surface units).
struct Atom {
    double position;
    double mass;
};

/// Regular density on cells plus finitely many atoms. The density is the cell
/// value (midpoint sample or cell average) of the generalized lateral surface b.
struct SurfaceMeasure {
    Grid grid;
    VectorXd density;  // n_cells, meters
    std::vector<Atom> atoms;
    double floor;      // a0

    static SurfaceMeasure constant(const Grid& grid, double value, double a0);

    /// Integral of the density plus the atom masses.
    double total() const;
    double density_integral() const;

    /// Throws std::invalid_argument on negative masses, atoms outside [0, l],
    /// densities below the floor or non-finite data.
    void validate() const;
};

/// Lateral surface density b = a sqrt(1 + a'^2) of a classical profile, per cell.
SurfaceMeasure surface_density(const RadiusProfile& a);

/// Nodal temperatures, stored as excess theta = T - T_inf.
struct TemperatureField {
    Grid grid;
    VectorXd theta;
    double T_inf;

    double temperature(Index i) const { return T_inf + theta[i]; }
    VectorXd temperatures() const { return theta.array() + T_inf; }
    /// Linear interpolation of theta at x.
    double theta_at(double x) const;
};

/// First-order response of theta to the swap perturbation at x0.
struct LinearizedField {
    Grid grid;
    VectorXd values;
    double source_position;
    /// Prescribed jump beta(x0) c (T(x0) - T_inf) of a^2 T~' across x0.
    double jump;
};

}  // namespace finopt
