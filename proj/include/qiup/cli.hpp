#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qiup::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationFailure = 1,
  kIoFailure = 2,
  kVerificationMismatch = 3,
};

/// Entry point shared by the `qiup` binary and the tests. `args[0]` is the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qiup::cli
