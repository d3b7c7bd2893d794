#include "surftopo_cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return surftopo::cli::run(argc, argv, std::cout, std::cerr); }
