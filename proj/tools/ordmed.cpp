#include <iostream>

#include "ordmed/cli.hpp"

int main(int argc, char** argv) { return ordmed::cli_main(argc, argv, std::cout, std::cerr); }
