#include <iostream>
#include <string>
#include <vector>

#include "qiup/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return qiup::cli::run(args, std::cout, std::cerr);
}
