#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return qwalk::cli::run_cli(args, std::getenv("QWALK_SEED"), std::cout, std::cerr);
}
