#pragma once

// Command-line front end shared by the `sysgraph` binary and the Python
// bindings.

#include <iosfwd>
#include <string>
#include <vector>

namespace sysgraph::cli {

enum ExitCode : int {
  kExitOk = 0,        // success, property holds, refinement holds
  kExitUsage = 1,     // bad arguments
  kExitInput = 2,     // unreadable or invalid input, runtime error
  kExitNegative = 3,  // property fails, refinement fails
};

// `args` excludes the program name. Never throws.
int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace sysgraph::cli
