#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"

#include "finopt/commands.hpp"
#include "finopt/core_solver.hpp"

using namespace finopt;

int main(int argc, char** argv) {
    CLI::App app{"Axisymmetric fin: temperature solver, shape optimizer and verification suite"};
    app.require_subcommand(1);

    std::string config_path, out_dir, format;
    Index n_cells = 0;
    long long seed = -1;

    const std::map<std::string, std::pair<std::string, std::function<CommandResult(const ExperimentConfig&)>>> commands{
        {"solve", {"Solve the temperature of the [profile] radius", cmd_solve}},
        {"optimize", {"Optimize the surface density for the first cap (or uncapped)", cmd_optimize}},
        {"sweep", {"Optimize for every cap in M_mm", cmd_sweep}},
        {"verify", {"Run the acceptance checks and write verify_report.json", cmd_verify}},
        {"sequence", {"Emit an a_{S,m}, bang-bang or volume-sequence profile", cmd_sequence}},
    };
    for (const auto& [name, entry] : commands) {
        CLI::App* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", config_path, "INI experiment file")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--n-cells", n_cells, "Grid cells (verify: finest grid of the convergence check)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", seed, "Seed of the randomized verification profiles")->check(CLI::NonNegativeNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        std::istringstream no_file;
        ExperimentConfig cfg = config_path.empty() ? parse_config(no_file, "defaults") : load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!format.empty()) cfg.format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (n_cells > 0) (name == "verify" ? cfg.convergence_cells : cfg.n_cells) = n_cells;
        validate(cfg);

        const CommandResult res = commands.at(name).second(cfg);
        for (const auto& s : res.summary) std::printf("%s\n", s.c_str());
        for (const auto& f : res.files) std::printf("wrote %s\n", f.string().c_str());
        return res.exit_code;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return exit_numerical;
    }
}
