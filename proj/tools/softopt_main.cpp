#include <iostream>
#include <string>
#include <vector>

#include "softopt/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return softopt::cli::run(args, std::cout, std::cerr);
}
