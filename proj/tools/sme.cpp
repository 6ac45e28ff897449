#include <iostream>
#include <string>
#include <vector>

#include "sme/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return sme::run_cli(args, std::cin, std::cout, std::cerr);
}
