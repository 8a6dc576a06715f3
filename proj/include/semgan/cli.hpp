#pragma once

#include <iostream>

#include "semgan/errors.hpp"

namespace semgan {

// Entry point of the `semgan` tool. Failures print one line
//   error category=<name> message="<text>"
// to err and return the category's exit code.
int run_cli(int argc, char** argv, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

int exit_code(ErrorCategory category);

}  // namespace semgan
