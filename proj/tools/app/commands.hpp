#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace entcost::app {

/// Exit codes of the command-line tool.
enum ExitCode { kOk = 0, kSolverFailure = 1, kBadInput = 2 };

/// Runs the tool on argv-style arguments (args[0] is the program name).
/// The report goes to `out` unless --out names a file; messages go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace entcost::app
