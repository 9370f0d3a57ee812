#include <iostream>
#include <string>
#include <vector>

#include "proxsdca/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return proxsdca::cli::main_command(args, std::cout, std::cerr);
}
