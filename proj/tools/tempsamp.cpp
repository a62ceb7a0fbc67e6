#include <iostream>
#include <string>
#include <vector>

#include "tempsamp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tempsamp::run_cli(args, std::cout, std::cerr);
}
