#include "erasure/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return erasure::cli_main(argc, argv, std::cout, std::cerr); }
