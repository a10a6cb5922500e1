#pragma once

#include <ostream>

namespace gridcert {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes shared by all subcommands.
enum ExitCode : int {
    kExitOk = 0,
    kExitNegative = 2,
    kExitInvalidInput = 3,
    kExitNumerical = 4,
    kExitInconclusive = 5,
};

/// Entry point of the `gridcert` tool. Subcommands: certify, simulate, freqresp,
/// global-check, min-gamma, first-order. GRIDCERT_GRID_POINTS overrides the default grid
/// density. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gridcert
