#pragma once

#include <string>
#include <vector>

namespace shapeseg::cli {

/// Runs one command line (without the program name). Returns the process
/// exit code: 0 success, 1 usage, 2 data error, 3 numeric failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace shapeseg::cli
