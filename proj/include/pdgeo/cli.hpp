#pragma once

#include <iosfwd>

namespace pdgeo {

// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitProvider = 3,
    kExitNumerical = 4,
};

// Entry point of the `pdgeo` tool: solve-bvp, solve-ivp, analyze, plot, density-info.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pdgeo
