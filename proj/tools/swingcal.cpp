#include <iostream>

#include "swingcal/commands.hpp"

int main(int argc, char** argv) { return swingcal::run_cli(argc, argv, std::cout, std::cerr); }
