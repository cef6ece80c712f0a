#include <iostream>

#include "dpc/cli.hpp"

int main(int argc, char** argv) { return dpc::run_cli(argc, argv, std::cout, std::cerr); }
