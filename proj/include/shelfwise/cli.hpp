#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace shelfwise {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,       // bad flags or out-of-range values
  kExitInput = 2,       // I/O, parse or bind failure
  kExitDiscovery = 3,   // unknown product, CapacityTooSmall, NoRates
  kExitReducible = 4,   // enhanced chain is not irreducible
  kExitSolver = 5,      // numerical failure
};

// Runs the tool with `args` (args[0] is the program name). Data goes to
// `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shelfwise
