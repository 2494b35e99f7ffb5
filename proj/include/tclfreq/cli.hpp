#pragma once

#include <string>
#include <vector>

namespace tclfreq {

// Entry point behind the command-line binary; returns the process exit code
// (0 success, 2 usage, 3 validation, 4 numeric/IO failure).
int run_cli(const std::vector<std::string>& args);

} // namespace tclfreq
