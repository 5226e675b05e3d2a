#include "iga/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return iga::run_cli(argc, argv, std::cout, std::cerr); }
