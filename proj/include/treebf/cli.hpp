#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace treebf {

enum ExitCode : int { kExitOk = 0, kExitFalse = 1, kExitUsage = 2, kExitInput = 3 };

/// Runs one command line (args[0] is the program name). Reports go to `out`,
/// diagnostics to `err`; `in` feeds encode/decode when no input is named.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace treebf
