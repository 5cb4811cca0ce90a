#include "sogt/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sogt::cli_main(argc, argv, std::cout, std::cerr); }
