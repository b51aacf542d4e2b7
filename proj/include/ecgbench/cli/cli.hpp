#pragma once

namespace ecgbench::cli {

/// Entry point of the `ecgbench` executable. Returns the process exit code.
int run(int argc, char** argv);

}  // namespace ecgbench::cli
