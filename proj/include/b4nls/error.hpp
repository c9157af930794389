#pragma once

#include <stdexcept>
#include <string>

namespace b4nls {

/// Raised when an argument violates a documented precondition. The message
/// names the violated condition so the CLI can report it verbatim.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails to deliver its contract
/// (iteration caps, blow-up guards, stagnation).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw PreconditionError(what);
}

}  // namespace b4nls
