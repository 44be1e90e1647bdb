#include <iostream>

#include "pdgeo/cli.hpp"

int main(int argc, char** argv) { return pdgeo::run_cli(argc, argv, std::cout, std::cerr); }
