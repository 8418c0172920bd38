#pragma once

#include <ostream>

namespace propdb::cli {

/// Runs the command line front end. Exit codes: 0 success, 2 usage error,
/// 3 data or query error, 4 exact inference infeasible.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace propdb::cli
