#pragma once

#include <iosfwd>

namespace spotvol::cli {

/// Exit codes: 0 success, 1 domain, regime or estimation failure, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Parses argv, dispatches the subcommand and maps failures to exit codes.
/// Errors go to `err` as one line of JSON {"code", "message"}.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace spotvol::cli
