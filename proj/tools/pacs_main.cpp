#include <iostream>
#include <string>
#include <vector>

#include "pacs/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pacs::cli_dispatch(args, std::cout, std::cerr);
}
