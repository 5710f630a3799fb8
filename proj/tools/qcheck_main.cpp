#include <iostream>
#include <string>
#include <vector>

#include "qcheck/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qcheck::cli::run(args, std::cout, std::cerr);
}
