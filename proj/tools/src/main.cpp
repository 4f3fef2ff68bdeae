#include <iostream>

#include "libpin_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return libpin::cli::run(args, std::cout, std::cerr);
}
