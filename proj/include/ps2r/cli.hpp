#pragma once

namespace ps2r::cli {

// Entry point for the ps2r command-line tool. Exit codes: 0 success,
// 1 runtime failure, 2 usage/config error.
int run(int argc, const char* const* argv);

} // namespace ps2r::cli
