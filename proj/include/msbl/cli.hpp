#pragma once

#include <ostream>

namespace msbl {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_bias_guard = 3,
    exit_degenerate = 4,
};

/// Entry point of the msbl command line; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace msbl
