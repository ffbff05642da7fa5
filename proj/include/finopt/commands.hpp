#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "finopt/config.hpp"
#include "finopt/optimizer.hpp"
#include "finopt/verification.hpp"

namespace finopt {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_verification = 2, exit_numerical = 3 };

struct CommandResult {
    int exit_code = exit_ok;
    std::vector<std::filesystem::path> files;
    std::vector<std::string> summary;  // one line per item for the console
};

/// Radius of the [profile] section on `grid`.
RadiusProfile build_profile(const ExperimentConfig& cfg, const Grid& grid);
/// Optimizer settings for one cap (ignored when uncapped).
OptimConfig optim_config(const ExperimentConfig& cfg, double M, bool uncapped);
SuiteSettings suite_settings(const ExperimentConfig& cfg);

/// Each command writes into cfg.out_dir (created if needed).
CommandResult cmd_solve(const ExperimentConfig& cfg);
CommandResult cmd_optimize(const ExperimentConfig& cfg);
CommandResult cmd_sweep(const ExperimentConfig& cfg);
CommandResult cmd_verify(const ExperimentConfig& cfg);
CommandResult cmd_sequence(const ExperimentConfig& cfg);

}  // namespace finopt
