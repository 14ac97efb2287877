#include <iostream>

#include "exr/cli.hpp"

int main(int argc, char** argv) { return exr::cli::run(argc, argv, std::cout, std::cerr); }
