#include "cxeuler/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return cxeuler::cli::main_entry(argc, argv, std::cout, std::cerr); }
