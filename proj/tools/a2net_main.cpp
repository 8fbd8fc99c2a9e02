#include <iostream>

#include "a2net/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return a2net::run_cli(args, std::cout, std::cerr);
}
