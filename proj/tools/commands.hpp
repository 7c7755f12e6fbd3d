#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace depsimp::cli {

enum ExitCode : int { kOk = 0, kPartialFailure = 1, kConfigError = 2 };

// Entry point shared by the executable and the tests. `args[0]` is the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace depsimp::cli
