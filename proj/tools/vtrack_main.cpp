#include <iostream>

#include "vtrack/cli.hpp"

int main(int argc, char** argv) { return vtrack::run_cli(argc, argv, std::cout, std::cerr); }
