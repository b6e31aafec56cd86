#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace intkit::cli {

/// Runs one command. args excludes the program name. The JSON report goes to
/// `out`, help text to `out` as well, the --pretty summary to `err`. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const std::vector<std::string>& command_names();

}  // namespace intkit::cli
