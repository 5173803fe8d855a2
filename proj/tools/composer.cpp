#include <iostream>

#include "wsc/cli.hpp"

int main(int argc, char** argv) { return wsc::cli::run_cli(argc, argv, std::cout, std::cerr); }
