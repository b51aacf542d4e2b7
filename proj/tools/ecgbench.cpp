#include "ecgbench/cli/cli.hpp"

int main(int argc, char** argv) { return ecgbench::cli::run(argc, argv); }
