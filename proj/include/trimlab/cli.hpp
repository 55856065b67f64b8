#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace trimlab::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_runtime = 2;

/// Runs one command line (args excludes the program name). Results go to
/// `out`, diagnostics and per-sample progress to `err`.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trimlab::cli
