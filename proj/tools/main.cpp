#include <string>
#include <vector>

#include "mtbo/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mtbo::run_cli(args);
}
