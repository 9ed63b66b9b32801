#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nodelab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Subcommands generate, train, solve, evaluate, oracle, bench. Returns the
// process exit status; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nodelab
