#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace krawtex::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name. Summaries go to
/// `out`; failures print one JSON object on one line to `err` and return
/// kExitUsage for unknown commands or bad arguments, kExitFailure otherwise.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const* argv);

} // namespace krawtex::cli
