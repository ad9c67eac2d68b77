#include <iostream>

#include "riffle_cli.hpp"

int main(int argc, char** argv) { return riffle::cli::run(argc, argv, std::cout, std::cerr); }
