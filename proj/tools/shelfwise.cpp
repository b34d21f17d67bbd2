#include <iostream>

#include "shelfwise/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return shelfwise::run_cli(args, std::cout, std::cerr);
}
