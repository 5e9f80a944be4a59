#include <iostream>
#include <string>
#include <vector>

#include "wavegraph/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return wavegraph::run_cli(args, std::cout, std::cerr);
}
