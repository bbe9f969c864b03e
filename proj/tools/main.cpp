#include "ebike/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return ebike::cli::run(argc, argv, std::cout, std::cerr);
}
