#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lingauss::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kNumericalFailure = 2,
};

// Entry point shared by the executable and the tests.
// Subcommands: integrate, sample, nestings, gradient, repro.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace lingauss::cli
