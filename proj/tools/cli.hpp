#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace magtunnel::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 64,      // bad flags or arguments
  kRegime = 65,     // inputs rejected by the physics: domain or regime errors
  kNumerical = 70,  // integration, quadrature or conditioning failures
};

/// Runs the command line `args` (without the program name), writing records
/// to `out` (or the --output file) and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace magtunnel::cli
