#pragma once

#include <limits>
#include <string>
#include <vector>

#include "finopt/fields.hpp"
#include "finopt/physics.hpp"

namespace finopt {

/// Truncated surface problem: maximize the relaxed flux F(a0, b) over cell densities
/// a0 <= b <= M with sum b h <= S0.
struct OptimConfig {
    double a0 = 0.0;
    double M = std::numeric_limits<double>::infinity();  // pointwise cap; ignored when uncapped
    double S0 = 0.0;
    Grid grid{1.0, 1};
    PhysicalParams params;
    int max_iters = 5000;
    double armijo_sigma = 1e-4;
    double backtrack = 0.5;
    /// Stop when the projected-gradient norm drops below tol * max |gradient|.
    double tol = 1e-13;
    bool uncapped = false;
    /// Newton steps on the free cells are tried while at most this many cells are free (0 disables).
    int newton_max_free = 1024;

    double cap() const { return uncapped ? std::numeric_limits<double>::infinity() : M; }
    /// Throws std::invalid_argument on M <= a0, S0 <= a0 l or x_M > l.
    void validate() const;
};

enum class CellState { Lower, Free, Upper };

struct OptimResult {
    SurfaceMeasure b_opt;
    RadiusProfile a_opt;
    double objective;       // W
    double switch_estimate; // m, mass-equivalent end of the upper-bound block
    std::vector<CellState> active_set;
    std::vector<double> trace;
    VectorXd gradient;      // dF/db_j at b_opt
    double stationarity;    // final projected-gradient norm relative to max |gradient|
    int iterations;
    bool converged;
    /// Empty when the radius reconstruction succeeded.
    std::string reconstruction_error;
};

/// Euclidean projection of z onto {lower <= y <= upper, h sum y <= budget}.
VectorXd project_box_budget(const VectorXd& z, double lower, double upper, double h, double budget);

/// Relaxed flux with a = a0 in the conduction term and density b in the reaction term.
double relaxed_objective(const SurfaceMeasure& b, const PhysicalParams& p);

OptimResult optimize(const OptimConfig& cfg);

struct BangReport {
    double x_M;
    double switch_location;     // right edge of the last cell at the upper bound
    double switch_equivalent;   // switch_location plus the interface cell's mass fraction
    double switch_error_cells;  // |switch_location - x_M| / h
    int intermediate_cells;
    double objective;
    double bang_objective;
    double relative_gap;
};

BangReport verify_bang_structure(const SurfaceMeasure& b, double objective, const OptimConfig& cfg);
BangReport verify_bang_structure(const OptimResult& res, const OptimConfig& cfg);

struct KktReport {
    double multiplier;
    double max_violation;  // relative to max |gradient|
};
KktReport check_kkt(const OptimResult& res, const OptimConfig& cfg);

/// Fraction of the excess mass int (b - a0) lying in [x_lo, x_hi] (partial cells pro rata).
double excess_fraction(const SurfaceMeasure& b, double x_lo, double x_hi);

struct SweepResult {
    std::vector<double> M;
    std::vector<OptimResult> members;
    bool non_decreasing;
};

/// One optimize per cap, run concurrently. M_list must be strictly increasing.
SweepResult sweep_M(const OptimConfig& cfg, const std::vector<double>& M_list);

const char* to_string(CellState s);

}  // namespace finopt
