#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pathmark {

/// Runs the `pathmark` command line with `args` (program name excluded).
/// Data goes to `out`, diagnostics to `err`. Returns 0 on success, 1 on a
/// user error and 2 on an internal error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pathmark
