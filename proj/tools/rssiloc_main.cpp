#include <iostream>

#include "rssiloc/cli.hpp"

int main(int argc, char** argv) { return rssiloc::cli::run_cli(argc, argv, std::cout, std::cerr); }
