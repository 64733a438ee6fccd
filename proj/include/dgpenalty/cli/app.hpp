#pragma once

#include <iosfwd>

namespace dgp::cli {

/// Exit codes of every subcommand.
enum ExitCode : int { Success = 0, CriterionFailed = 1, UsageError = 2 };

/// Entry point of the `dgpenalty` tool.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace dgp::cli
