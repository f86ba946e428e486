#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mlcache::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitUsage = 64;

/// Runs one subcommand. `args` excludes the program name. CSV goes to `out`
/// unless --out is given; diagnostics and usage text go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// printf("%.9g"), the format of every number the CLI writes.
std::string format_number(double x);

}  // namespace mlcache::cli
