#include <iostream>

#include "fglm/cli.hpp"

int main(int argc, char** argv) {
    return fglm::run_cli(argc, argv, std::cout, std::cerr);
}
