#pragma once

#include <iosfwd>

namespace rrt {

/// Parses arguments and runs one subcommand. Returns the process exit code:
/// 0 success, 2 configuration or schema error, 3 data error, 4 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rrt
