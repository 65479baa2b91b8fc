#pragma once

#include <string>
#include <vector>

namespace grok::cli {

// Exit codes: 0 success, 1 I/O or malformed input, 2 invalid arguments.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitUsage = 2;

// Entry point for the `grok` tool: gen, run, sweep, report, plot.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace grok::cli
