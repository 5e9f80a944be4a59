#pragma once

// The wavegraph command line: gen, train, eval, oracle, gradcheck.

#include <cstddef>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace wavegraph {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

/// Parses "a..b" (or a single "a"). Throws InvalidInput on malformed or empty ranges.
std::pair<std::size_t, std::size_t> parse_size_range(const std::string& text);

/// Runs one command; `args` excludes the program name. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wavegraph
