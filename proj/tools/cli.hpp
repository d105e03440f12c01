#pragma once

#include <iosfwd>

namespace xlb::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 2;
inline constexpr int kFindings = 3;

// Parses and runs one command line; the process entry point and the
// acceptance harness both go through here.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace xlb::cli
