#include <iostream>

#include "ionet_cli/commands.hpp"

int main(int argc, char** argv) { return ionet::cli::run(argc, argv, std::cout, std::cerr); }
