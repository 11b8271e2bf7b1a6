#include "ps2r/cli.hpp"

int main(int argc, char** argv) { return ps2r::cli::run(argc, argv); }
