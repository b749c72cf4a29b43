#ifndef RELSCOPE_CLI_HPP
#define RELSCOPE_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace relscope {

enum ExitStatus : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

// Runs one subcommand. args excludes the program name. Errors are reported as
// a single "relscope: error: ..." line on `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_command(int argc, char** argv);

}  // namespace relscope

#endif  // RELSCOPE_CLI_HPP
