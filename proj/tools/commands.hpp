#pragma once

#include "sdcnn/error.hpp"

namespace sdcnn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;

int exit_code_for(ErrorKind kind);

// Entry point shared by the sdcnn binary and the in-process CLI tests.
int run(int argc, char** argv);

}  // namespace sdcnn::cli
