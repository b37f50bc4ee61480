#include "commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return entcost::app::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
