#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "finopt/fields.hpp"
#include "finopt/physics.hpp"

namespace finopt {

/// Malformed or inconsistent experiment configuration; the message names the line or field.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class ProfileKind { Constant, Cone, Asm, Table, Csv };
enum class ConstraintKind { Surface, Volume };
enum class SequenceKind { Asm, Bang, Volume };
enum class OutputFormat { Csv, Json };

struct ProfileSpec {
    ProfileKind kind = ProfileKind::Constant;
    double radius = 0.0;       // constant radius, or base radius of a cone (m); 0 means a0
    double tip_radius = 0.0;   // cone radius at x = l (m)
    double S = 0.0;            // a_{S,m} surface parameter (m^2)
    int m = 16;
    std::vector<double> x, a;  // tabulated samples (m)
    std::string path;          // profile.csv to re-ingest
};

struct SequenceSpec {
    SequenceKind kind = SequenceKind::Asm;
    double S = 0.0;  // a_{S,m}: surface parameter (m^2); 0 means the constraint S0
    int m = 16;
    int n = 5;       // volume sequence index
};

/// Experiment description in SI units (all lengths converted from mm on ingestion).
struct ExperimentConfig {
    double a0 = 1e-3;
    double length = 0.1;
    PhysicalParams params;
    ProfileSpec profile;
    ConstraintKind constraint = ConstraintKind::Surface;
    double S0 = 0.0;  // surface budget, integral of a sqrt(1 + a'^2) (m^2)
    double V0 = 0.0;  // volume budget, integral of a^2 (m^3)
    std::vector<double> M_list;  // increasing caps (m)
    bool uncapped = false;
    SequenceSpec sequence;
    Index n_cells = 500;
    Index convergence_cells = 4096;
    int max_iters = 5000;
    double tol = 1e-13;
    std::uint64_t seed = 20240917;
    std::string out_dir = "out";
    OutputFormat format = OutputFormat::Csv;
};

/// Parses INI text. `source` names the input in diagnostics.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "config");
ExperimentConfig load_config(const std::string& path);

/// Checks cross-field consistency and throws ConfigError naming the violated bound.
void validate(const ExperimentConfig& cfg);

const char* to_string(OutputFormat f);

}  // namespace finopt
