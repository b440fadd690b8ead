#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "liouville/error.hpp"

namespace liouville {

using Complex = std::complex<double>;

/// Value with first and second derivative along one variable.
template <typename T>
struct EvalResult {
  T value{};
  T d1{};
  T d2{};
};

/// Parsed arithmetic expression over one or two named variables.
///
/// Grammar, loosest binding first:
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := '-' unary | power
///     power   := primary ('^' unary)?        right-associative
///     primary := number | variable | func '(' expr ')' | '(' expr ')'
///     func    := exp | ln | sin | cos | sinh | cosh | sqrt
///
/// The exponent of '^' must fold to an integer constant; real powers are
/// written exp(p*ln(x)). An Expr is immutable and cheap to copy (the node
/// table is shared), so it can be evaluated from many threads at once.
class Expr {
 public:
  /// Throws ParseError with code expr.SyntaxError, expr.UnknownIdentifier or
  /// expr.ArityError, carrying the byte offset of the offending token.
  static Expr parse(std::string_view src, std::vector<std::string> vars);

  const std::vector<std::string>& vars() const noexcept { return *vars_; }
  std::size_t arity() const noexcept { return vars_->size(); }
  std::size_t var_index(std::string_view name) const;

  /// True when no variable appears in the tree.
  bool is_constant() const noexcept;

  /// Fully parenthesised source that parses back to an equivalent tree.
  std::string to_string() const;

  /// Value and derivatives along variable `wrt`. Real mode rejects ln/sqrt of
  /// non-positive arguments; both modes reject division by zero and the
  /// branch point of ln/sqrt. Violations throw DomainError naming the
  /// offending sub-expression.
  template <typename T>
  EvalResult<T> eval(std::span<const T> at, std::size_t wrt) const;

  /// Value only (no derivative bookkeeping).
  double operator()(std::span<const double> at) const;
  double operator()(double x) const;

  struct Node;

 private:
  Expr() = default;

  std::shared_ptr<const std::vector<Node>> nodes_;
  std::shared_ptr<const std::vector<std::string>> vars_;
  int root_ = -1;

  template <typename T>
  friend struct Evaluator;
};

/// Free-function front end.
inline Expr parse(std::string_view src, std::vector<std::string> vars) {
  return Expr::parse(src, std::move(vars));
}

EvalResult<double> eval_dual(const Expr& e, std::span<const double> at,
                             std::size_t wrt);
EvalResult<Complex> eval_dual(const Expr& e, std::span<const Complex> at,
                              std::size_t wrt);

/// F(z) and F'(z) of a single-variable expression read as analytic in z.
std::pair<Complex, Complex> eval_complex(const Expr& e, Complex z);

/// Single-variable convenience: (value, d/dx, d2/dx2) at x.
EvalResult<double> eval_dual(const Expr& e, double x);

}  // namespace liouville
