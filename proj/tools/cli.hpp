#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace commutree::cli {

/// Stable exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitThetaExceedsFeasibleSet = 2;
inline constexpr int kExitVerificationFailed = 3;

/// Runs one command line (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace commutree::cli
