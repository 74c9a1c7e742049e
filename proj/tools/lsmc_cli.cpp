#include "lsmc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return lsmc::run_cli(argc, argv, std::cout, std::cerr); }
