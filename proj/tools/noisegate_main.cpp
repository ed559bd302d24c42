#include "noisegate/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return noisegate::run_cli(argc, argv, std::cout, std::cerr); }
