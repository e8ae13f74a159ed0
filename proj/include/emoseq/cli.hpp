#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emoseq::cli {

/// Runs the `emoseq` command line. args[0] is the program name. Tables go to
/// `out` (or --output), diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emoseq::cli
