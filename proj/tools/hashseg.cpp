#include <iostream>

#include "hashseg/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hashseg::run_cli(args, std::cin, std::cout, std::cerr);
}
