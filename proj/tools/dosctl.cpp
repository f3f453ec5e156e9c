#include <iostream>

#include "dosslot/cli.hpp"

int main(int argc, char** argv) { return dosslot::cli::run(argc, argv, std::cout, std::cerr); }
