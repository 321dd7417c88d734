#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace touchsig {

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 2 on usage errors, 1 on any other failure; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace touchsig
