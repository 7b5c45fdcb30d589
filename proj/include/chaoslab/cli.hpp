#pragma once

#include <iosfwd>

namespace chaoslab {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitAssertion = 1,
  kExitUsage = 2,
  kExitHypothesis = 3,
};

/// Entry point of the `chaoslab` tool; data goes to `out` unless --out is
/// given, diagnostics go to `err`.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace chaoslab
