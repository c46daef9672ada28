#pragma once

#include <iosfwd>

namespace flipper::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kInfeasible = 3,
  kIo = 4,
};

/// Entry point of the `flipperplan` tool. Failures are reported as one line on
/// `err`: `error: code=<n> kind=<kind> message="<text>"`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flipper::cli
