#include <iostream>

#include "actcause/cli.hpp"

int main(int argc, char** argv) { return actcause::cli::main_entry(argc, argv, std::cout, std::cerr); }
