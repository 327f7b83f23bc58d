#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace casimir::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one invocation.  args excludes the program name.  Results go to the
/// --output file when given, otherwise to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace casimir::cli
