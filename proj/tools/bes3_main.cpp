#include <iostream>

#include "bes3/cli.hpp"

int main(int argc, char** argv) { return bes3::run_cli(argc, argv, std::cout, std::cerr); }
