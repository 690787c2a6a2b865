#include <iostream>
#include <string>
#include <vector>

#include "itemlab/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return itemlab::cli::run(args, std::cout, std::cerr);
}
