#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qcheck::cli {

inline constexpr int kSchemaVersion = 1;

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitConfigError = 2;

/// Runs the `qcheck` command line. `args` excludes the program name. Results go to the
/// file named by --out, or to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qcheck::cli
