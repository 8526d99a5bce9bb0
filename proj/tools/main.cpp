#include <iostream>
#include <string>
#include <vector>

#include "diffuvolume/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return diffuvolume::cli_run(args, std::cout, std::cerr);
}
