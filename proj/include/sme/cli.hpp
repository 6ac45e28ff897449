#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sme {

// Stable exit codes for scripting.
enum ExitCode : int {
    exit_ok = 0,
    exit_internal = 1,
    exit_usage = 2,
    exit_data = 3,
    exit_numerical = 4,
};

// Runs the `sme` command line (args exclude the program name). Standard
// output goes to `out`, diagnostics to `err`; `in` feeds `score` when no
// triples are given as arguments.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace sme
