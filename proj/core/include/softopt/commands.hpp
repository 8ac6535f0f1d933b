#pragma once

// The `softopt` command line: optimize, sensitivity, convergence, evaluate, pareto.
// Exit codes: 0 success, 2 user/config error, 3 solver failure.

#include <iosfwd>
#include <string>
#include <vector>

namespace softopt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSolver = 3;

/// args excludes the program name.
[[nodiscard]] int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace softopt::cli
