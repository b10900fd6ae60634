#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdgen {

// Malformed text input (formula, proof term, grammar, config, TSV).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  explicit ParseError(const std::string& what)
      : std::runtime_error(what), position_(0) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Unknown axiom identifier, undeclared pattern, parameter in the wrong place,
// inconsistent engine configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A requested transformation is impossible for the given input (undefined
// MGT where one is required, missing axiom for combinator elimination, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Step or memory budget exhausted.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cdgen
