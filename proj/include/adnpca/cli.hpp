#pragma once

#include <iosfwd>

namespace adnpca::cli {

// Stable exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNumericalFailure = 3;

/// Entry point behind `adnpca fit|sweep|heuristic|synth|report`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace adnpca::cli
