#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wpar::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kDataError = 2,
  kDivergence = 3,
};

// Subcommands: gen-data, train, eval, project-depth, parse-audit, plot.
// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wpar::cli
