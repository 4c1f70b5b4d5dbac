#include <iostream>

#include "msbl/cli.hpp"

int main(int argc, char** argv) { return msbl::run_cli(argc, argv, std::cout, std::cerr); }
