#pragma once

#include <optional>
#include <vector>

#include "finopt/fields.hpp"
#include "finopt/physics.hpp"

namespace finopt {

/// Closed form of the oscillating profile a_{S,m}: m arcs of circles of radius
/// M_m = a0 + (S - a0 l) m on [0, 1/m], each period 1/m^2 a rising arc followed by its
/// mirror image, and a = a0 on [1/m, l]. Along every arc a sqrt(1 + a'^2) = M_m.
struct ArcSequence {
    double S;
    int m;
    double a0;
    double length;

    /// Throws std::invalid_argument when S < a0 l, m < 1, 1/m >= l, or a half period
    /// is longer than the rising part of the arc.
    void validate() const;

    bool degenerate() const { return S == a0 * length; }
    double plateau() const;  // M_m
    double support() const { return 1.0 / m; }
    double period() const { return 1.0 / (static_cast<double>(m) * m); }
    double half_period() const { return 0.5 * period(); }
    /// Distance from each arc start to its circle's apex, sqrt(M_m^2 - a0^2).
    double apex_offset() const;

    double value(double x) const;
    double slope(double x) const;
    /// Closed-form surface density: M_m on [0, 1/m], a0 beyond.
    double density(double x) const;
};

/// Step density b_{S,m} = a0 + (S - a0 l) m on [0, 1/m], a0 beyond, as exact cell averages
/// so that total() = S.
SurfaceMeasure build_bsm(double S, int m, double a0, const Grid& grid);

/// a_{S,m} sampled at the grid nodes. Requires at least `min_cells_per_half_period` cells per
/// half period 1/(2 m^2).
RadiusProfile build_asm(double S, int m, double a0, const Grid& grid, int min_cells_per_half_period = 8);

/// Bang-bang density: M on (0, x_M), a0 on (x_M, l), x_M = (S0 - a0 l) / (M - a0), as exact cell averages.
SurfaceMeasure build_bang_b(double M, double S0, double a0, const Grid& grid);
double bang_switch(double M, double S0, double a0, double length);

struct OscillationSpec {
    double x_start;
    double x_end;
    int n_oscillations;
};

/// Default oscillation count on an interval of width eps: floor(1/eps) + 1 (eps in meters).
int default_oscillations(double width);

/// Radius whose lateral density matches the atom-free b on each spec interval. Each of the
/// n_oscillations sub-intervals [x, x + eta] gets a rising branch integrated forward from
/// a_boundary and a falling branch integrated backward to a_boundary, spliced where they cross.
/// Outside the intervals a = a_boundary.
RadiusProfile reconstruct_radius(const SurfaceMeasure& b, const std::vector<OscillationSpec>& specs,
                                 double a_boundary);

/// Maximal runs of cells with density above floor (1 + rel_tol), as oscillation intervals
/// with the default count, capped at `max_oscillations` per run.
std::vector<OscillationSpec> excess_intervals(const SurfaceMeasure& b, double rel_tol = 1e-9,
                                              int max_oscillations = 1000);

/// excess_intervals with each run's oscillation count limited so an oscillation spans >= 8 cells.
std::vector<OscillationSpec> resolved_intervals(const SurfaceMeasure& b);

struct VolumeSequenceOptions {
    /// When set, m_n must also satisfy F(a_{n,m}) >= k pi beta (T_d - T_inf)
    /// (a0^{3/2} gamma / sqrt(beta) + n - a0 l - 1/n) (constant beta only).
    std::optional<PhysicalParams> params;
    int min_cells_per_half_period = 8;
    int max_m = 4096;
};

struct VolumeSequenceMember {
    RadiusProfile profile;
    SurfaceMeasure density;  // exact b_{n,m}
    int n;
    int m;
    double volume;
    std::optional<double> flux;
};

/// a_n = a_{S=n, m_n} with m_n the smallest m for which vol <= V0 - 1/n (and the flux bound, if asked).
/// Throws std::invalid_argument when the grid cannot resolve the candidate m.
VolumeSequenceMember build_volume_sequence(int n, double V0, double a0, const Grid& grid,
                                           const VolumeSequenceOptions& options = {});

}  // namespace finopt
