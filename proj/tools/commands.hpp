#pragma once

#include <iosfwd>

namespace chaoslab::cli {

// Exit codes: 0 all checks pass (or inconclusive), 1 a check failed,
// 2 usage, configuration or I/O error, 3 internal numerical error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace chaoslab::cli
