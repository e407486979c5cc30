#pragma once

#include <stdexcept>
#include <string>

namespace trpmbm {

/// Input violates a structural constraint (genealogy marks, tree shape).
class ConstraintError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the valid range (time step outside a tree horizon, ...).
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Integer result does not fit the representation.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Matrix dimensions do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical operation failed (singular innovation covariance, non-finite weights).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An assignment problem has no feasible solution.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, int blocked_row)
      : std::runtime_error(what), blocked_row_(blocked_row) {}
  int blocked_row() const noexcept { return blocked_row_; }

 private:
  int blocked_row_;
};

/// Malformed text input (tree encoding, CSV); `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line) : std::runtime_error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Scenario file could not be parsed or failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trpmbm
