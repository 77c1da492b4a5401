#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mechcheck::cli {

enum ExitCode : int {
  kYes = 0,
  kNo = 1,
  kInputError = 2,
  kResourcesExceeded = 3,
};

// Runs one command. `args` excludes the program name. The JSON result goes to
// `out`; diagnostics and the --verbose summary go to `err`.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mechcheck::cli
