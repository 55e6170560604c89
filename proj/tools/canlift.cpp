#include <iostream>

#include "canlift/cli.hpp"

int main(int argc, char** argv) {
    return canlift::cli::run(argc, argv, std::cout, std::cerr);
}
