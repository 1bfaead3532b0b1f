#include <iostream>

#include "cfx/cli.hpp"

int main(int argc, char** argv) { return cfx::run_cli(argc, argv, std::cout, std::cerr); }
