#pragma once

#include <iosfwd>

namespace semivar::cli {

/// Runs one command line and returns the process exit code: 0 on success,
/// 2 on an input error (bad data, missing file, invalid option), 3 on a
/// numerical degeneracy. Results go to `out`, messages to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace semivar::cli
