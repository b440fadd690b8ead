#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace liouville::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationError = 1;
inline constexpr int kNonConvergence = 2;

/// Runs one subcommand. `args` excludes the program name. Fields go to the
/// path given by --out (or `out` for "-"); the one-line JSON summary goes to
/// `out`, or to `err` when `out` already carries the primary output or the
/// run failed.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace liouville::cli
