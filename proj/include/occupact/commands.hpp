#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "occupact/config.hpp"

namespace occupact {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitIo = 3 };

/// Sidecar path next to `out`: "runs/a.csv" with suffix "atoms.json" gives
/// "runs/a.atoms.json".
std::string sidecar_path(const std::string& out, const std::string& suffix);

// Each command computes everything first and writes afterwards, so a failure
// leaves no partial files. Without cfg.out the main output goes to `out`.
int cmd_density(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_joint(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_table(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& log);

/// Full command line: parses flags, resolves the config, runs the command and
/// maps errors to exit codes.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace occupact
