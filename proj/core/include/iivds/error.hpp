#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iivds {

enum class ErrorKind {
  Parameter,           // invalid numeric/count argument
  Input,               // malformed input value (mixed identities, out-of-range score)
  DegenerateTemplate,  // digital identity with an empty stability mask
  Schema,              // histogram bin_count/kind mismatch, bad file header
  Io,
  ExtrapolationUnavailable,
  OutOfRange,          // inverse threshold unreachable on the grid
  DegenerateLandscape, // a >= b when deriving the safety interval
  Configuration,
  CalibrationFailure,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace iivds
