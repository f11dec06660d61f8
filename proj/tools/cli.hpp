#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aplab::cli {

enum ExitCode : int {
  ok = 0,
  validation = 2,
  no_convergence = 3,
  property_flag = 4,
  unknown_command = 64,
  unreadable_spec = 66,
  internal = 70,
};

const std::vector<std::string>& subcommands();

/// Parses argv (argv[0] is the program name), runs one subcommand and writes
/// <out>/<command>.csv (and .svg where a plot applies).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aplab::cli
