#include <iostream>

#include "dripper/cli.hpp"

int main(int argc, char** argv) { return dripper::run_cli(argc, argv, std::cout, std::cerr); }
