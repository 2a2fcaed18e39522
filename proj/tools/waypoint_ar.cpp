#include <iostream>
#include <string>
#include <vector>

#include "waypoint_ar/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return wpar::cli::run(args, std::cout, std::cerr);
}
