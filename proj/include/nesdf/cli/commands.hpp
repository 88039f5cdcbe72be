#pragma once

#include <iosfwd>

namespace nesdf::cli {

/// Exit codes: 0 success or soft result, 2 config error, 3 numeric failure, 4 format error.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumeric = 3, kExitFormat = 4 };

/// Entry point of the `nesdf` tool: `nesdf <subcommand> [--config f] [--seed n] [--out dir]
/// [--section.key value ...]`. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace nesdf::cli
