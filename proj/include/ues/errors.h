#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ues {

// Vector or matrix sizes that do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Requested operation is not defined for the given nonsmooth term.
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Iterative estimate that did not settle; carries the last value reached.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_estimate)
      : std::runtime_error(what), last_estimate_(last_estimate) {}
  double last_estimate() const { return last_estimate_; }

 private:
  double last_estimate_;
};

// Adaptive Lipschitz search exceeded its safety ceiling.
class DivergingSearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solver produced a non-finite objective value, gap or bound.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension " +
                         std::to_string(a) + " != " + std::to_string(b));
  }
}

}  // namespace ues
