#include "vespucci/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return vespucci::run_cli(argc, argv, std::cout, std::cerr); }
