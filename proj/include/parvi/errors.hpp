#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace parvi {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// |W(q)| >= 1 where a Randers metric was requested.
class AlphaNonPositive : public Error {
 public:
  explicit AlphaNonPositive(double alpha)
      : Error("wind speed reached 1 (alpha = " + std::to_string(alpha) + ")"), alpha_(alpha) {}
  double alpha() const noexcept { return alpha_; }

 private:
  double alpha_;
};

// Zermelo Lagrangian evaluated at a discrete velocity below the smoothness threshold.
class DegenerateVelocity : public Error {
 public:
  explicit DegenerateVelocity(double speed)
      : Error("discrete velocity too small for F^2 (|v| = " + std::to_string(speed) + ")") {}
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

// Errors raised by the relaxation sweep carry the offending sample index.
class IndexedError : public Error {
 public:
  IndexedError(const std::string& what, std::size_t index)
      : Error(what + " at index " + std::to_string(index)), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class SingularJacobian : public IndexedError {
 public:
  using IndexedError::IndexedError;
};

class InnerNoConvergence : public IndexedError {
 public:
  using IndexedError::IndexedError;
};

class NonFiniteState : public Error {
 public:
  NonFiniteState(std::size_t iteration, std::size_t index)
      : Error("non-finite state at index " + std::to_string(index) + " after iteration " +
              std::to_string(iteration)),
        iteration_(iteration),
        index_(index) {}
  std::size_t iteration() const noexcept { return iteration_; }
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t iteration_;
  std::size_t index_;
};

class InconsistentWaypoints : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Expression errors report a byte offset into the source text.
class ExprError : public Error {
 public:
  ExprError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class SyntaxError : public ExprError {
 public:
  SyntaxError(const std::string& found, std::size_t offset, std::vector<std::string> expected)
      : ExprError("syntax error: found " + found + ", expected " + join(expected), offset),
        expected_(std::move(expected)) {}
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += i + 1 == items.size() ? " or " : ", ";
      out += items[i];
    }
    return out;
  }
  std::vector<std::string> expected_;
};

class UnknownIdentifier : public ExprError {
 public:
  UnknownIdentifier(const std::string& name, std::size_t offset)
      : ExprError("unknown identifier '" + name + "'", offset), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class DomainError : public ExprError {
 public:
  using ExprError::ExprError;
};

}  // namespace parvi
