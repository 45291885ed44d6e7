#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace causabs::cli {

// Runs one command line (without the program name). Returns the exit code:
// 0 success, 1 domain failure, 2 usage or input failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace causabs::cli
