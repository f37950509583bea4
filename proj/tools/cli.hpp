#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hsm::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kCapExceeded = 2,
  kRegime = 3,
  kVerificationFailed = 4,
};

/// Runs the hsm command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hsm::cli
