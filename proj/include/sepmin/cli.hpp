#pragma once

#include <string>
#include <vector>

#include "sepmin/config.hpp"

namespace sepmin {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFail = 1;
inline constexpr int kExitDiverged = 2;
inline constexpr int kExitConfig = 3;

// Runs every algorithm in the config, writing one trace file per seed plus an
// aggregate per algorithm under the output directory.
int cmd_solve(const std::string& config_path, const CliOverrides& ov);

// Runs one self-contained invariant suite and prints a JSON report.
int cmd_verify(const std::string& suite, const CliOverrides& ov);

// Runs several configs sharing one problem section and merges their
// per-algorithm aggregates onto a common gradient-query grid.
int cmd_compare(const std::vector<std::string>& config_paths, const CliOverrides& ov);

// Full argv-level entry point.
int run_cli(int argc, const char* const* argv);

}  // namespace sepmin
