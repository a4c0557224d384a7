#pragma once

#include <string>
#include <vector>

namespace diffpath {

// Runs one CLI invocation. Returns 0 on success, 1 on usage errors, 2 on
// data errors. args excludes the program name.
int run_command(std::vector<std::string> args);

int run_command(int argc, char** argv);

}  // namespace diffpath
