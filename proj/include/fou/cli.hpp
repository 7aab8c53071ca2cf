#pragma once

#include <iosfwd>

namespace fou::cli {

/// Runs the `fou` command line and returns its exit code:
/// 0 on success, 1 on failed checks under --strict or a numerical failure,
/// 2 on usage, domain or configuration errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace fou::cli
