#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sbsim::cli {

// Exit codes
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kRuntimeError = 3;
inline constexpr int kDegenerate = 4;

/// Entry point shared by the `sbsim` binary and the in-process tests.
/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sbsim::cli
