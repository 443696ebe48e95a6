#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace contactkit {

// Command-line front end. `args` holds the arguments without the program
// name, in natural order. All regular output goes to `out`, messages about
// failures to `err`. Returns the process exit code: 0 on success, 1 on
// usage or input errors (flags, config files, model definitions, parameter
// ranges), 2 on computational failures (projection, search, integration).
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace contactkit
