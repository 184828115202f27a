#include <iostream>

#include "stratagen/cli.hpp"

int main(int argc, char** argv) { return stratagen::cli::runCli(argc, argv, std::cout, std::cerr); }
