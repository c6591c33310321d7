#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "iivds/modal_logic.hpp"

namespace iivds::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Parses `args` (without the program name) and runs one subcommand.
/// `ops` is the algebra checked by verify-algebra.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const AlgebraOps& ops = {});

}  // namespace iivds::cli
