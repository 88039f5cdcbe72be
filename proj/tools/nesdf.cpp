#include "nesdf/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return nesdf::cli::run(argc, argv, std::cout, std::cerr); }
