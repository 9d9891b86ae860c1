// Command-line front end; all logic lives in commands.cpp.

#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return eqfree::cli::run_cli(args, std::cout, std::cerr);
}
