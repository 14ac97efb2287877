#pragma once

// The `exr` command line: eval, check, gen, classify, diagnose, simulate.

#include <iosfwd>
#include <string>
#include <vector>

namespace exr::cli {

/// `args` excludes the program name. Exit codes: 0 clean, 1 warnings,
/// 2 errors, 3 parse/IO/usage failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace exr::cli
