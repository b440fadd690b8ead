#include "liouville/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

#include "liouville/dual.hpp"

namespace liouville {

enum class Op {
  variable, literal, add, sub, mul, div, pow, neg,
  exp, ln, sin, cos, sinh, cosh, sqrt,
};

struct Expr::Node {
  Op op;
  int lhs = -1;
  int rhs = -1;
  double literal = 0.0;
  long long exponent = 0;
  int var = -1;
};

namespace {

struct FunctionName {
  std::string_view name;
  Op op;
};

constexpr std::array<FunctionName, 7> kFunctions{{
    {"exp", Op::exp}, {"ln", Op::ln}, {"sin", Op::sin}, {"cos", Op::cos},
    {"sinh", Op::sinh}, {"cosh", Op::cosh}, {"sqrt", Op::sqrt},
}};

std::optional<Op> lookup_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (f.name == name) return f.op;
  return std::nullopt;
}

std::string_view function_name(Op op) {
  for (const auto& f : kFunctions)
    if (f.op == op) return f.name;
  return "?";
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen,
                 rparen, comma, end };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string_view text;
  double number = 0.0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) return {Tok::end, start, {}};
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t p = pos_;
      while (p < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[p])) || src_[p] == '.'))
        ++p;
      if (p < src_.size() && (src_[p] == 'e' || src_[p] == 'E')) {
        std::size_t q = p + 1;
        if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
        if (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q]))) {
          while (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q])))
            ++q;
          p = q;
        }
      }
      Token t{Tok::number, start, src_.substr(start, p - start)};
      auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + p, t.number);
      if (ec != std::errc{} || ptr != src_.data() + p)
        throw ParseError("expr.SyntaxError", "malformed number", start);
      pos_ = p;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t p = pos_;
      while (p < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[p])) || src_[p] == '_'))
        ++p;
      pos_ = p;
      return {Tok::ident, start, src_.substr(start, p - start)};
    }
    ++pos_;
    switch (c) {
      case '+': return {Tok::plus, start, src_.substr(start, 1)};
      case '-': return {Tok::minus, start, src_.substr(start, 1)};
      case '*': return {Tok::star, start, src_.substr(start, 1)};
      case '/': return {Tok::slash, start, src_.substr(start, 1)};
      case '^': return {Tok::caret, start, src_.substr(start, 1)};
      case '(': return {Tok::lparen, start, src_.substr(start, 1)};
      case ')': return {Tok::rparen, start, src_.substr(start, 1)};
      case ',': return {Tok::comma, start, src_.substr(start, 1)};
      default:
        throw ParseError("expr.SyntaxError",
                         std::string("unexpected character '") + c + "'", start);
    }
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& vars)
      : lexer_(src), vars_(vars) {
    advance();
  }

  int parse_all(std::vector<Expr::Node>& out) {
    nodes_ = &out;
    const int root = parse_expr();
    if (tok_.kind != Tok::end) fail("unexpected token");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) {
    throw ParseError("expr.SyntaxError", what, tok_.offset);
  }

  void advance() { tok_ = lexer_.next(); }

  int push(Expr::Node n) {
    nodes_->push_back(n);
    return static_cast<int>(nodes_->size()) - 1;
  }

  int parse_expr() {
    int lhs = parse_term();
    while (tok_.kind == Tok::plus || tok_.kind == Tok::minus) {
      const Op op = tok_.kind == Tok::plus ? Op::add : Op::sub;
      advance();
      const int rhs = parse_term();
      lhs = push({op, lhs, rhs});
    }
    return lhs;
  }

  int parse_term() {
    int lhs = parse_unary();
    while (tok_.kind == Tok::star || tok_.kind == Tok::slash) {
      const Op op = tok_.kind == Tok::star ? Op::mul : Op::div;
      advance();
      const int rhs = parse_unary();
      lhs = push({op, lhs, rhs});
    }
    return lhs;
  }

  int parse_unary() {
    if (tok_.kind == Tok::minus) {
      advance();
      return push({Op::neg, parse_unary()});
    }
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    if (tok_.kind != Tok::caret) return base;
    advance();
    const std::size_t at = tok_.offset;
    const int exponent = parse_unary();
    const std::optional<double> folded = fold_constant(exponent);
    if (!folded)
      throw ParseError("expr.SyntaxError", "exponent must be a constant", at);
    const double n = *folded;
    if (!(std::abs(n) <= 1e6) || n != std::floor(n))
      throw ParseError("expr.SyntaxError", "exponent must be an integer", at);
    // The exponent subtree stays in the table but is no longer referenced.
    Expr::Node node{Op::pow, base};
    node.exponent = static_cast<long long>(n);
    return push(node);
  }

  int parse_primary() {
    switch (tok_.kind) {
      case Tok::number: {
        Expr::Node n{Op::literal};
        n.literal = tok_.number;
        advance();
        return push(n);
      }
      case Tok::lparen: {
        advance();
        const int inner = parse_expr();
        if (tok_.kind != Tok::rparen) fail("expected ')'");
        advance();
        return inner;
      }
      case Tok::ident:
        return parse_identifier();
      case Tok::end:
        fail("unexpected end of input");
      default:
        fail("unexpected token '" + std::string(tok_.text) + "'");
    }
  }

  int parse_identifier() {
    const Token id = tok_;
    advance();
    if (auto it = std::find(vars_.begin(), vars_.end(), id.text); it != vars_.end()) {
      Expr::Node n{Op::variable};
      n.var = static_cast<int>(it - vars_.begin());
      return push(n);
    }
    const std::optional<Op> fn = lookup_function(id.text);
    if (!fn)
      throw ParseError("expr.UnknownIdentifier",
                       "unknown identifier '" + std::string(id.text) + "'", id.offset);
    if (tok_.kind != Tok::lparen)
      throw ParseError("expr.ArityError",
                       "function '" + std::string(id.text) + "' needs one argument",
                       id.offset);
    advance();
    if (tok_.kind == Tok::rparen)
      throw ParseError("expr.ArityError",
                       "function '" + std::string(id.text) + "' needs one argument",
                       id.offset);
    const int arg = parse_expr();
    if (tok_.kind == Tok::comma)
      throw ParseError("expr.ArityError",
                       "function '" + std::string(id.text) + "' takes one argument",
                       id.offset);
    if (tok_.kind != Tok::rparen) fail("expected ')'");
    advance();
    return push({*fn, arg});
  }

  std::optional<double> fold_constant(int idx) const {
    const Expr::Node& n = (*nodes_)[idx];
    switch (n.op) {
      case Op::literal: return n.literal;
      case Op::variable: return std::nullopt;
      case Op::neg: {
        auto a = fold_constant(n.lhs);
        return a ? std::optional(-*a) : std::nullopt;
      }
      case Op::add: case Op::sub: case Op::mul: case Op::div: {
        auto a = fold_constant(n.lhs);
        auto b = fold_constant(n.rhs);
        if (!a || !b) return std::nullopt;
        if (n.op == Op::add) return *a + *b;
        if (n.op == Op::sub) return *a - *b;
        if (n.op == Op::mul) return *a * *b;
        return *a / *b;
      }
      case Op::pow: {
        auto a = fold_constant(n.lhs);
        return a ? std::optional(std::pow(*a, static_cast<double>(n.exponent)))
                 : std::nullopt;
      }
      default:
        return std::nullopt;  // functions are not folded
    }
  }

  Lexer lexer_;
  const std::vector<std::string>& vars_;
  std::vector<Expr::Node>* nodes_ = nullptr;
  Token tok_{Tok::end, 0, {}};
};

void print_node(const std::vector<Expr::Node>& nodes,
                const std::vector<std::string>& vars, int idx, std::string& out) {
  const Expr::Node& n = nodes[idx];
  auto binary = [&](const char* sym) {
    out += '(';
    print_node(nodes, vars, n.lhs, out);
    out += sym;
    print_node(nodes, vars, n.rhs, out);
    out += ')';
  };
  switch (n.op) {
    case Op::variable: out += vars[n.var]; break;
    case Op::literal: out += format_double(n.literal); break;
    case Op::add: binary(" + "); break;
    case Op::sub: binary(" - "); break;
    case Op::mul: binary(" * "); break;
    case Op::div: binary(" / "); break;
    case Op::neg:
      out += "(-";
      print_node(nodes, vars, n.lhs, out);
      out += ')';
      break;
    case Op::pow:
      out += '(';
      print_node(nodes, vars, n.lhs, out);
      out += ")^(" + std::to_string(n.exponent) + ")";
      break;
    default:
      out += function_name(n.op);
      out += '(';
      print_node(nodes, vars, n.lhs, out);
      out += ')';
  }
}

bool uses_variable(const std::vector<Expr::Node>& nodes, int idx) {
  const Expr::Node& n = nodes[idx];
  if (n.op == Op::variable) return true;
  if (n.op == Op::literal) return false;
  if (n.lhs >= 0 && uses_variable(nodes, n.lhs)) return true;
  return n.rhs >= 0 && n.op != Op::pow && uses_variable(nodes, n.rhs);
}

}  // namespace

template <typename T>
struct Evaluator {
  const Expr& e;
  std::span<const T> at;
  std::size_t wrt;

  static constexpr bool is_real = std::is_same_v<T, double>;

  [[noreturn]] void domain_error(const std::string& what, int idx) const {
    std::string sub;
    print_node(*e.nodes_, *e.vars_, idx, sub);
    throw DomainError(what, sub);
  }

  Dual2<T> run(int idx) const {
    const Expr::Node& n = (*e.nodes_)[idx];
    switch (n.op) {
      case Op::variable: {
        const T x = at[static_cast<std::size_t>(n.var)];
        return static_cast<std::size_t>(n.var) == wrt ? Dual2<T>::variable(x)
                                                      : Dual2<T>::constant(x);
      }
      case Op::literal: return Dual2<T>::constant(T(n.literal));
      case Op::add: return run(n.lhs) + run(n.rhs);
      case Op::sub: return run(n.lhs) - run(n.rhs);
      case Op::mul: return run(n.lhs) * run(n.rhs);
      case Op::div: {
        const Dual2<T> num = run(n.lhs);
        const Dual2<T> den = run(n.rhs);
        if (den.v == T{}) domain_error("division by zero", idx);
        return num / den;
      }
      case Op::neg: return -run(n.lhs);
      case Op::pow: {
        const Dual2<T> base = run(n.lhs);
        if (n.exponent < 0 && base.v == T{}) domain_error("zero to a negative power", idx);
        return pow(base, n.exponent);
      }
      case Op::exp: return exp(run(n.lhs));
      case Op::ln: {
        const Dual2<T> a = run(n.lhs);
        if constexpr (is_real) {
          if (!(a.v > 0.0)) domain_error("ln of non-positive value", idx);
        } else {
          if (a.v == T{}) domain_error("ln at branch point 0", idx);
        }
        return log(a);
      }
      case Op::sqrt: {
        const Dual2<T> a = run(n.lhs);
        if constexpr (is_real) {
          if (!(a.v > 0.0)) domain_error("sqrt of non-positive value", idx);
        } else {
          if (a.v == T{}) domain_error("sqrt at branch point 0", idx);
        }
        return sqrt(a);
      }
      case Op::sin: return sin(run(n.lhs));
      case Op::cos: return cos(run(n.lhs));
      case Op::sinh: return sinh(run(n.lhs));
      case Op::cosh: return cosh(run(n.lhs));
    }
    return {};
  }
};

Expr Expr::parse(std::string_view src, std::vector<std::string> vars) {
  if (src.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw ParseError("expr.SyntaxError", "empty expression", 0);
  if (vars.empty() || vars.size() > 2)
    throw Error("expr.ArityError", "expressions take one or two variables");
  for (const auto& v : vars)
    if (lookup_function(v))
      throw Error("expr.SyntaxError", "variable name '" + v + "' is reserved");
  auto nodes = std::make_shared<std::vector<Node>>();
  Parser parser(src, vars);
  Expr e;
  e.root_ = parser.parse_all(*nodes);
  e.nodes_ = std::move(nodes);
  e.vars_ = std::make_shared<const std::vector<std::string>>(std::move(vars));
  return e;
}

std::size_t Expr::var_index(std::string_view name) const {
  auto it = std::find(vars_->begin(), vars_->end(), name);
  if (it == vars_->end())
    throw Error("expr.UnknownIdentifier", "no variable '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - vars_->begin());
}

bool Expr::is_constant() const noexcept { return !uses_variable(*nodes_, root_); }

std::string Expr::to_string() const {
  std::string out;
  print_node(*nodes_, *vars_, root_, out);
  return out;
}

template <typename T>
EvalResult<T> Expr::eval(std::span<const T> at, std::size_t wrt) const {
  if (at.size() != arity())
    throw Error("expr.ArityError", "point has " + std::to_string(at.size()) +
                                       " coordinates, expression has " +
                                       std::to_string(arity()) + " variables");
  if (wrt >= arity()) throw Error("expr.ArityError", "derivative variable out of range");
  const Dual2<T> r = Evaluator<T>{*this, at, wrt}.run(root_);
  return {r.v, r.d1, r.d2};
}

template EvalResult<double> Expr::eval(std::span<const double>, std::size_t) const;
template EvalResult<Complex> Expr::eval(std::span<const Complex>, std::size_t) const;

double Expr::operator()(std::span<const double> at) const { return eval(at, 0).value; }

double Expr::operator()(double x) const {
  return eval(std::span<const double>(&x, 1), 0).value;
}

EvalResult<double> eval_dual(const Expr& e, std::span<const double> at, std::size_t wrt) {
  return e.eval(at, wrt);
}

EvalResult<Complex> eval_dual(const Expr& e, std::span<const Complex> at,
                              std::size_t wrt) {
  return e.eval(at, wrt);
}

EvalResult<double> eval_dual(const Expr& e, double x) {
  return e.eval(std::span<const double>(&x, 1), 0);
}

std::pair<Complex, Complex> eval_complex(const Expr& e, Complex z) {
  if (e.arity() != 1)
    throw Error("expr.ArityError", "analytic seed must have a single variable");
  const EvalResult<Complex> r = e.eval(std::span<const Complex>(&z, 1), 0);
  return {r.value, r.d1};
}

}  // namespace liouville
