#include <iostream>
#include <string>
#include <vector>

#include "qsic/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return qsic::cli::cli_main(args, std::cout, std::cerr);
}
