#pragma once

#include <stdexcept>
#include <string>

namespace repmix {

// Library-wide error with a short machine-readable kind.  Kinds in use:
// "dim", "singular", "domain", "config", "io", "numeric", "underflow",
// "nonconvergence", "usage".
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(msg), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

}  // namespace repmix
