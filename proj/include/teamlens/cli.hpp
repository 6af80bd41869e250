#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace teamlens::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2 };

/// Runs the command line `args` (without the program name). Payloads go to
/// `out`, everything meant for humans goes to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace teamlens::cli
