#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace doakit {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitVerification = 4,
};

/// Entry point of the doa-kit command line; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace doakit
