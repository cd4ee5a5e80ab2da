#include <iostream>
#include <string>
#include <vector>

#include "sysgraph/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sysgraph::cli::dispatch(args, std::cin, std::cout, std::cerr);
}
