#include <iostream>

#include "xsm/simulator.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return xsm::simulator_main(argc, argv, std::cout, std::cerr, std::cin);
}
