#include "finopt/fields.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace finopt {

RadiusProfile RadiusProfile::constant(const Grid& grid, double a0) { return constant(grid, a0, a0); }

RadiusProfile RadiusProfile::constant(const Grid& grid, double value, double a0) {
    return RadiusProfile{grid, VectorXd::Constant(grid.n_nodes(), value), a0};
}

VectorXd RadiusProfile::midpoint_squares() const {
    const Index n = grid.n_cells();
    VectorXd mid = 0.5 * (values.head(n) + values.tail(n));
    return mid.array().square();
}

VectorXd RadiusProfile::midpoint_slopes() const {
    const Index n = grid.n_cells();
    return (values.tail(n) - values.head(n)) / grid.spacing();
}

void RadiusProfile::validate() const {
    if (!(std::isfinite(floor) && floor > 0.0)) {
        throw std::invalid_argument("RadiusProfile: floor a0 must be positive");
    }
    if (values.size() != grid.n_nodes()) {
        throw std::invalid_argument("RadiusProfile: expected " + std::to_string(grid.n_nodes()) + " nodal values");
    }
    if (!values.allFinite()) throw std::invalid_argument("RadiusProfile: non-finite radius");
    const double lowest = values.minCoeff();
    if (lowest < floor) {
        throw std::invalid_argument("RadiusProfile: radius " + std::to_string(lowest) + " below floor a0 = " +
                                    std::to_string(floor));
    }
}

SurfaceMeasure SurfaceMeasure::constant(const Grid& grid, double value, double a0) {
    return SurfaceMeasure{grid, VectorXd::Constant(grid.n_cells(), value), {}, a0};
}

double SurfaceMeasure::density_integral() const { return density.sum() * grid.spacing(); }

double SurfaceMeasure::total() const {
    double mass = 0.0;
    for (const auto& atom : atoms) mass += atom.mass;
    return density_integral() + mass;
}

void SurfaceMeasure::validate() const {
    if (density.size() != grid.n_cells()) {
        throw std::invalid_argument("SurfaceMeasure: expected " + std::to_string(grid.n_cells()) + " cell densities");
    }
    if (!density.allFinite()) throw std::invalid_argument("SurfaceMeasure: non-finite density");
    // Relative slack for densities produced by sqrt/rounding right at the floor.
    const double lowest = density.minCoeff();
    if (lowest < floor * (1.0 - 1e-12)) {
        throw std::invalid_argument("SurfaceMeasure: density " + std::to_string(lowest) + " below floor a0 = " +
                                    std::to_string(floor));
    }
    for (const auto& atom : atoms) {
        if (!std::isfinite(atom.position) || !std::isfinite(atom.mass)) {
            throw std::invalid_argument("SurfaceMeasure: non-finite atom");
        }
        if (atom.position < 0.0 || atom.position > grid.length()) {
            throw std::invalid_argument("SurfaceMeasure: atom position " + std::to_string(atom.position) +
                                        " outside [0, l]");
        }
        if (atom.mass < 0.0) throw std::invalid_argument("SurfaceMeasure: negative atom mass");
    }
}

SurfaceMeasure surface_density(const RadiusProfile& a) {
    const Index n = a.grid.n_cells();
    const VectorXd slope = a.midpoint_slopes();
    const VectorXd mid = 0.5 * (a.values.head(n) + a.values.tail(n));
    VectorXd b = mid.array() * (1.0 + slope.array().square()).sqrt();
    return SurfaceMeasure{a.grid, std::move(b), {}, a.floor};
}

double TemperatureField::theta_at(double x) const {
    const Index j = grid.cell_containing(x);
    const double t = (x - grid.node(j)) / grid.spacing();
    return (1.0 - t) * theta[j] + t * theta[j + 1];
}

}  // namespace finopt
