#pragma once

namespace ascsense::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitMissingFile = 4;
inline constexpr int kExitCheckFailed = 5;

/// Parses argv, runs the selected subcommand and returns the process exit code.
int parse_and_dispatch(int argc, const char* const* argv);

}  // namespace ascsense::cli
