#include <iostream>
#include <string>
#include <vector>

#include "kflann/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kflann::run_cli(args, std::cout, std::cerr);
}
