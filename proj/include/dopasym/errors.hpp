#pragma once

#include <stdexcept>
#include <string>

namespace dopasym {

// Bad input: mapped to exit code 2 by the command-line tool.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string kind, const std::string& what)
      : std::invalid_argument(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Numerical breakdown: mapped to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

}  // namespace dopasym
