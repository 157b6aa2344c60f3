#include <iostream>
#include <string>
#include <vector>

#include "ioncav/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return ioncav::run_cli(args, std::cout, std::cerr);
}
