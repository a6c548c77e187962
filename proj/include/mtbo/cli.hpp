#pragma once

#include <string>
#include <vector>

namespace mtbo {

/// Entry point shared by the binary and the tests.
/// Exit codes: 0 success, 1 configuration/usage error, 2 runtime failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace mtbo
