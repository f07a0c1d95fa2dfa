#include <iostream>

#include "qeilab_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const auto r = qeilab::cli::run(std::move(args));
  std::cout << r.output;
  if (!r.error.empty()) std::cerr << "qeilab: " << r.error << "\n";
  return r.exit_code;
}
