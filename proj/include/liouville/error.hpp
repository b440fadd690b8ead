#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace liouville {

/// Broad failure class; the CLI maps it onto its exit code.
enum class ErrorKind {
  validation,      // bad input, domain violation, singular data
  nonconvergence,  // an iterative solve gave up
};

/// Base of every error thrown by the library. `code()` is module-qualified,
/// e.g. "expr.SyntaxError" or "elliptic.NonConvergence".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message,
        ErrorKind kind = ErrorKind::validation)
      : std::runtime_error(message), code_(std::move(code)), kind_(kind) {}

  const std::string& code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_; }

 private:
  std::string code_;
  ErrorKind kind_;
};

// expr

class ParseError : public Error {
 public:
  ParseError(std::string code, const std::string& message, std::size_t offset)
      : Error(std::move(code),
              message + " at offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class DomainError : public Error {
 public:
  DomainError(const std::string& message, std::string subexpr)
      : Error("expr.DomainError", message + " in '" + subexpr + "'"),
        subexpr_(std::move(subexpr)) {}
  const std::string& subexpression() const noexcept { return subexpr_; }

 private:
  std::string subexpr_;
};

// fields

class GridTooSmall : public Error {
 public:
  explicit GridTooSmall(const std::string& message)
      : Error("fields.GridTooSmall", message) {}
};

class NonPositiveField : public Error {
 public:
  explicit NonPositiveField(const std::string& message)
      : Error("fields.NonPositiveField", message) {}
};

class EmptyInterior : public Error {
 public:
  EmptyInterior() : Error("fields.EmptyInterior", "no non-sentinel entries") {}
};

// closedform

class SingularNode : public Error {
 public:
  SingularNode(std::ptrdiff_t i, std::ptrdiff_t j)
      : Error("closedform.SingularNode",
              "f(x)+g(y) vanishes at node (" + std::to_string(i) + "," +
                  std::to_string(j) + ")"),
        i_(i), j_(j) {}
  std::ptrdiff_t i() const noexcept { return i_; }
  std::ptrdiff_t j() const noexcept { return j_; }

 private:
  std::ptrdiff_t i_, j_;
};

class NonMonotoneG : public Error {
 public:
  explicit NonMonotoneG(const std::string& message)
      : Error("closedform.NonMonotoneG", message) {}
};

// hyperbolic

class CellIterationDivergence : public Error {
 public:
  CellIterationDivergence(std::ptrdiff_t i, std::ptrdiff_t j)
      : Error("hyperbolic.CellIterationDivergence",
              "cell update did not converge at node (" + std::to_string(i) +
                  "," + std::to_string(j) + ")",
              ErrorKind::nonconvergence),
        i_(i), j_(j) {}
  std::ptrdiff_t i() const noexcept { return i_; }
  std::ptrdiff_t j() const noexcept { return j_; }

 private:
  std::ptrdiff_t i_, j_;
};

class OdeOverflow : public Error {
 public:
  /// `segment` names the first integration segment that escaped, e.g.
  /// "bottom edge, step 12" or "column 7, step 30".
  explicit OdeOverflow(std::string segment)
      : Error("hyperbolic.OdeOverflow", "solution escaped to +inf on " + segment),
        segment_(std::move(segment)) {}
  const std::string& segment() const noexcept { return segment_; }

 private:
  std::string segment_;
};

}  // namespace liouville
