#pragma once

#include <stdexcept>
#include <string>

namespace subpop {

/// Raised when inputs violate a documented precondition (bad flag value,
/// malformed file, invalid configuration). The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace subpop
