#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace osteonav::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsageError = 2;

/// Runs one command line (without the program name). Results go to `out`
/// unless --output is given; failures print one JSON object
/// {"error": kind, "message": ..., ["line": n]} to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace osteonav::cli
