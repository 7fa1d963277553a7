#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dsf {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitSolver = 2, kExitTrend = 3 };

/// Runs one subcommand: solve-limit, solve-eps, optimize-limit,
/// optimize-eps, energy-study, converge, verify-cell, verify-gradient.
/// `args` excludes the program name. Returns an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dsf
