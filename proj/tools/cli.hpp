#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace pcc::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 2,
    kNumericFailure = 3,
};

/// Environment variable naming the default root for --out directories.
inline constexpr const char* kOutputRootEnv = "PCC_OUTPUT_ROOT";

/// Runs `pcc <subcommand> ...`. argv[0] is the program name. Machine-readable
/// artifacts go to files; `out` gets short results, `err` progress and errors.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

} // namespace pcc::cli
