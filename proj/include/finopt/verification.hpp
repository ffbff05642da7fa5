#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "finopt/fields.hpp"
#include "finopt/physics.hpp"

namespace finopt {

struct CheckResult {
    std::string id;
    std::string name;
    bool passed = false;
    bool skipped = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

/// Inputs of the check suite that a configuration may override.
struct SuiteSettings {
    Index convergence_cells = 4096;  // finest grid of the closed-form comparison
    std::uint64_t seed = 20240917;
    /// Scenario for the generalized-supremum item (defaults to a decreasing h).
    double a0 = 1e-3;
    double length = 0.1;
    double S0 = 3e-4;
    PhysicalParams params;
    std::vector<double> M_list;

    SuiteSettings();
};

/// Random admissible data for property checks.
struct RandomScenario {
    RadiusProfile a;
    SurfaceMeasure b;
    PhysicalParams p;
};
RadiusProfile random_profile(const Grid& grid, double a0, std::mt19937_64& rng);
ConvectionProfile random_convection(double length, std::mt19937_64& rng);
RandomScenario random_scenario(std::mt19937_64& rng, bool with_atoms);

CheckResult check_closed_form(const SuiteSettings& s);
CheckResult check_flux_identity(const SuiteSettings& s);
CheckResult check_temperature_bounds(const SuiteSettings& s);
CheckResult check_surface_sequence(const SuiteSettings& s);
CheckResult check_volume_sequence(const SuiteSettings& s);
CheckResult check_gradient(const SuiteSettings& s);
CheckResult check_bang_bang(const SuiteSettings& s);
CheckResult check_supremum_monotonicity(const SuiteSettings& s);
CheckResult check_excess_placement(const SuiteSettings& s);
CheckResult check_surface_bound(const SuiteSettings& s);
CheckResult check_generalized_supremum(const SuiteSettings& s);

/// Every check above, in order.
std::vector<CheckResult> run_suite(const SuiteSettings& s);

}  // namespace finopt
