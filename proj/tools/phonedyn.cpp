#include <phonedyn/cli.hpp>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return phonedyn::cli::run(args);
}
