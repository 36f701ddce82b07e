#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eitsim {

inline constexpr const char* kOutDirEnv = "EITSIM_OUT_DIR";

/// Parses `args` (without the program name), runs the subcommand and
/// returns the process exit status.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace eitsim
