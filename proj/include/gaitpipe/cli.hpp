#pragma once

#include <iosfwd>

#include "gaitpipe/error.hpp"

namespace gaitpipe::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitDiverged = 3;

// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "GAITPIPE_OUT_DIR";

int exit_code_for(ErrorCode code);

// Runs one subcommand. CSV results go to `out` unless a file is given;
// the resolved configuration and diagnostics go to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace gaitpipe::cli
