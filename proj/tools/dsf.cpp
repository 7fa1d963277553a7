#include <iostream>
#include <string>
#include <vector>

#include "dsf/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return dsf::run(args, std::cout, std::cerr);
}
