#include <iostream>

#include "cuspforge/cli.hpp"

int main(int argc, char** argv) { return cuspforge::run_cli(argc, argv, std::cout, std::cerr); }
