#include <iostream>

#include "nodelab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return nodelab::run_cli(args, std::cout, std::cerr);
}
