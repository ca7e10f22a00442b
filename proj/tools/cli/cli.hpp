#pragma once

// Command dispatch for the rfls tool, callable in-process for tests.

#include <iosfwd>

namespace rfls::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kInfeasible = 3,
  kNumerical = 4,
  kUnstable = 5,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rfls::cli
