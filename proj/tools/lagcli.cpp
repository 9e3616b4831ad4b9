#include <iostream>

#include "lagnet/cli/lagcli.hpp"

int main(int argc, char** argv) {
  return lagnet::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
