#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "polykam/mechanism.hpp"
#include "polykam_cli/config.hpp"

namespace polykam::cli {

enum ExitCode : int { kSuccess = 0, kFailure = 1, kNegative = 2 };

// Entry point of the polykam executable.
int run(int argc, char** argv);

// Command implementations; each writes under `out` and returns an exit code.
int cmd_alpha(const RunConfig& cfg, const std::filesystem::path& out, double c_min, double c_max, int steps,
              std::ostream& log);
int cmd_solve(const RunConfig& cfg, const std::filesystem::path& out, double c, const std::string& word,
              std::ostream& log);
int cmd_aubry(const RunConfig& cfg, const std::filesystem::path& out, double c, std::ostream& log);
int cmd_circles(const RunConfig& cfg, const std::filesystem::path& out, double c, std::ostream& log);
int cmd_rspace(const RunConfig& cfg, const std::filesystem::path& out, double c, std::ostream& log);
int cmd_diffuse(const RunConfig& cfg, const std::filesystem::path& out, double c_from, double c_to, std::ostream& log);
int cmd_verify(const RunConfig& cfg, const std::filesystem::path& orbit_csv, std::ostream& log);
int cmd_selftest(std::ostream& log);

// Options for the core modules derived from a run configuration.
SolveOptions solve_options(const RunConfig& cfg);
CircleOptions circle_options(const RunConfig& cfg);
ProbeOptions probe_options(const RunConfig& cfg);
DiffuseOptions diffuse_options(const RunConfig& cfg);

// step,x,p,label,residual with one row per point; the last row has empty
// label and residual. Numbers use 17 significant digits.
std::string orbit_to_csv(const PolyOrbit& orbit);
PolyOrbit orbit_from_csv(const std::string& text);

// Exit code for an error: 2 for honest negatives, 1 otherwise.
int exit_code_for(ErrorCode code);

}  // namespace polykam::cli
