#include <iostream>

#include "scafrest/cli.hpp"

int main(int argc, char** argv) {
  return scafrest::cli_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
