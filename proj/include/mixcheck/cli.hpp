#pragma once

#include <string>
#include <vector>

namespace mixcheck::cli {

/// Full command-line entry point; args includes the program name.
/// Exit codes: 0 success, 1 usage error, 2 numeric failure.
int run(const std::vector<std::string>& args);

}  // namespace mixcheck::cli
