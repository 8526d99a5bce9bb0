#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace diffuvolume {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Command-line entry point. `args` excludes the program name. Subcommands:
/// demo, run, eval, probe-entropy, gen. Reports go to `out`, diagnostics to
/// `err`; returns kExitOk, kExitUsage or kExitData.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace diffuvolume
