#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scalinglaw::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line. `args` excludes the program name. Reports go to
/// `out`; usage text and single-line error JSON go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scalinglaw::cli
