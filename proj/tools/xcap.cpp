#include <iostream>

#include "xcap/bridge/cli.hpp"

int main(int argc, char** argv) { return xcap::bridge::run_cli(argc, argv, std::cout, std::cerr); }
