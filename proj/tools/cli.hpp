#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ebpttn::cli {

/// Runs the command line (without the program name) and returns the exit
/// status: 0 success, 2 configuration error, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ebpttn::cli
