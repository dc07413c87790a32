#include <string>
#include <vector>

#include "chemclip_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return chemclip::cli::run(args);
}
