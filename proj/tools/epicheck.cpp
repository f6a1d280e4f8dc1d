#include <iostream>
#include <string>
#include <vector>

#include "epistemic/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return epi::cli::run(args, std::cout, std::cerr);
}
