#pragma once

#include "crimesim/config.hpp"

#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace crimesim::cli {

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kConfig = 3,      ///< invalid configuration or model parameters
    kIo = 4,          ///< unreadable input or unwritable output
    kMesh = 5,        ///< malformed or invalid mesh
    kLinearSolver = 6,
    kConvergence = 7, ///< fixed-point or Newton iteration failed
    kFit = 8,
    kDegenerate = 9,  ///< attractiveness reached zero where the model needs A > 0
};

/// Exit code for an exception escaping a command.
int exit_code_for(std::exception_ptr error);

struct CommonOptions {
    std::string config_path;
    std::string out_dir;  ///< empty: output.dir, else ./out
    std::optional<std::uint64_t> seed;
    std::string preset;
    std::vector<std::string> overrides;  ///< key=value pairs applied last
};

/// Config file, preset and overrides merged in that order of precedence
/// (overrides win). Throws ConfigError.
Config load_config(const CommonOptions& options);

int cmd_pde_run(const CommonOptions& options, std::ostream& log);
int cmd_abm_run(const CommonOptions& options, std::ostream& log);
int cmd_sweep_eta(const CommonOptions& options, std::vector<double> etas, std::ostream& log);
/// Hotspot report of one field of a VTK snapshot, or fits of a sweep CSV.
/// Smallest peak elevation above the baseline that counts as a hotspot.
inline constexpr double kMinRise = 0.01;

int cmd_analyze(const CommonOptions& options, const std::string& input, const std::string& field,
                std::optional<double> baseline, double min_rise, std::ostream& log);
int cmd_mesh_gen(const CommonOptions& options, std::ostream& log);

/// Worker count for sweeps from CRIMESIM_THREADS (default 1).
int thread_count();

/// Full command-line entry point.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace crimesim::cli
