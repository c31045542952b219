#include <string>
#include <vector>

#include "specsim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return specsim::cli_main(args);
}
