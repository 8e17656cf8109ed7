#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace catmmv {

// Full command-line entry point, callable from tests.  Returns the process exit
// code: 0 success, 1 validation/usage error, 2 numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace catmmv
