#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"

#ifdef IIVDS_FAULT_INJECTION
namespace {
// Deliberately wrong complement: the identity map.
std::uint8_t broken_complement(int x) { return static_cast<std::uint8_t>(x & 7); }
}  // namespace
#endif

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  iivds::AlgebraOps ops;
#ifdef IIVDS_FAULT_INJECTION
  ops.n = &broken_complement;
#endif
  return iivds::cli::run(args, std::cout, std::cerr, ops);
}
