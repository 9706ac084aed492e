#pragma once

#include <ostream>

namespace xcap::bridge {

/// Entry point of the xcap tool. Returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace xcap::bridge
