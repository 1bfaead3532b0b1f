#pragma once

#include <ostream>

namespace cfx {

// Exit codes of the command line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,  // bad arguments, I/O and validation errors
  kExitInfeasible = 2,
  kExitCapExceeded = 3,
  kExitOracleMismatch = 4,
};

// Entry point of the `cfx` tool. Results go to `out` (or --out), diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cfx
