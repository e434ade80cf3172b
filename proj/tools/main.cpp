#include <iostream>

#include "lagspec/cli.hpp"

int main(int argc, char** argv) {
  return lagspec::cli::main_entry(argc, argv, lagspec::cli::process_env(), std::cout, std::cerr);
}
