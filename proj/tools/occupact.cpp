#include <iostream>

#include "occupact/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return occupact::run_cli(args, std::cout, std::cerr);
}
