#pragma once

#include <exception>
#include <ostream>
#include <string>
#include <vector>

namespace philap {

/// Process exit statuses of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitHypothesis = 2,
    kExitNumerical = 3,
    kExitConfig = 4,
};

/// Maps a library exception to its exit status.
int exit_code_for(const std::exception& e);

/// `solve|hypotheses|bounds|sweep --config PATH [--out DIR] [--grid-n N]`.
/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace philap
