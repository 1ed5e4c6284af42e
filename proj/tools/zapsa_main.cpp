#include <string>
#include <vector>

#include "zapsa/cli.hpp"

int main(int argc, char** argv) {
  return zapsa::cli::main_entry(std::vector<std::string>(argv + 1, argv + argc));
}
