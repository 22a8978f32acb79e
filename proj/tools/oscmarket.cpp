#include <iostream>

#include "oscmarket/commands.hpp"

int main(int argc, char** argv) {
  return oscmarket::run_cli(argc, argv, std::cout, std::cerr);
}
