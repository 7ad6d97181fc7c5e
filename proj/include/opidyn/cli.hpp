#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace opidyn::cli {

// Runs one CLI invocation. args excludes the program name. Returns the
// process exit code: 0 success, 2 input or validation error, 3 analytical
// refusal (the requested quantity is undefined for this network).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace opidyn::cli
