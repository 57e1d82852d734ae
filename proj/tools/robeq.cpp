#include <iostream>

#include "robeq/cli/commands.hpp"

int main(int argc, char **argv) {
    return robeq::cli::run_cli(argc, argv, std::cout, std::cerr);
}
