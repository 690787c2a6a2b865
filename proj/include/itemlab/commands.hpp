#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace itemlab::cli {

// Parses and dispatches a full command line (without argv[0]); returns the
// process exit code. 0 = success, 1 = operation failure, 2 = usage or
// missing-path errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace itemlab::cli
