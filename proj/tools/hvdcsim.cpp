#include <iostream>

#include "hvdcsim/cli.hpp"

int main(int argc, char** argv) { return hvdcsim::cli::run(argc, argv, std::cout, std::cerr); }
