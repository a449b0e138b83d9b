#pragma once

#include <iosfwd>
#include <string>

namespace bes3 {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitIo = 3,
};

/// Entry point behind the `bes3` binary; `out` receives data written to
/// standard output, `err` diagnostics.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Locale-independent shortest-of-9-significant-digits rendering used for all
/// CSV output.
std::string format_number(double value);

}  // namespace bes3
