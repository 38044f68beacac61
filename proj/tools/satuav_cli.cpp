#include <iostream>

#include "satuav/cli.hpp"

int main(int argc, char **argv) { return satuav::run_cli(argc, argv, std::cout, std::cerr); }
