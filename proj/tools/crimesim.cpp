#include "crimesim/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return crimesim::cli::run_cli(argc, argv, std::cout, std::cerr); }
