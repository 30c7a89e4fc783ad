#include <iostream>

#include "verify/cli.hpp"

int main(int argc, char** argv) { return verify::cli_main(argc, argv, std::cout, std::cerr); }
