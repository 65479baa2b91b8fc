#pragma once

#include <stdexcept>
#include <string>

namespace grok {

// Bad arguments: wrong shapes, out-of-range parameters, non-finite input.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iteration that provably does not contract (rho >= 1).
class NoConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable, unwritable or malformed files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InputError(msg);
}

}  // namespace grok
