#include "propdb/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return propdb::cli::run(argc, argv, std::cout, std::cerr); }
