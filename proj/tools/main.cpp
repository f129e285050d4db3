#include "mhd/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return mhd::cli::main_entry(std::vector<std::string>(argv + 1, argv + argc), std::cout,
                              std::cerr);
}
