#include <iostream>

#include "hhmo_cli/cli.hpp"

int main(int argc, char** argv) { return hhmo::cli::run(argc, argv, std::cout, std::cerr); }
