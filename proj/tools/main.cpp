#include <iostream>

#include "gridcert/cli.hpp"

int main(int argc, char** argv) { return gridcert::run_cli(argc, argv, std::cout, std::cerr); }
