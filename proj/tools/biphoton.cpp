#include "biphoton/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return biphoton::cli::main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
