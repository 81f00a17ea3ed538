#include <iostream>

#include "heatplan/cli.hpp"

int main(int argc, char** argv) { return heatplan::run_cli(argc, argv, std::cout, std::cerr); }
