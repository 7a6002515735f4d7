#include <iostream>

#include "chebcon/cli.hpp"

int main(int argc, char** argv) { return chebcon::run_cli(argc, argv, std::cout, std::cerr); }
