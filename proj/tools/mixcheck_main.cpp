#include <string>
#include <vector>

#include "mixcheck/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return mixcheck::cli::run(args);
}
