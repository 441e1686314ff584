#include <iostream>

#include "sonowork/cli.hpp"

int main(int argc, char** argv) { return sonowork::cli::run(argc, argv, std::cout, std::cerr); }
