#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace roomimp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one subcommand. args excludes the program name. Results go to the
/// --out file when given, otherwise to `out`; diagnostics go to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace roomimp::cli
