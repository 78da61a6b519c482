#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "paracr/rational.hpp"

namespace paracr {

enum class Kind { Constant, Variable, Sum, Product, Quotient, Power, Function, Negate };
enum class Func { Exp, Log, Sqrt, Sin, Cos };

class Expr;

/// Binding of variable names to doubles.
using EvalPoint = std::map<std::string, double, std::less<>>;

/// Thrown by evaluate() for unbound variables, near-zero denominators and
/// values outside a function's real domain.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by parse_expr(); offset is the byte position of the problem.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  [[nodiscard]] std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct Node;

/// Immutable symbolic expression. Copies share structure.
///
/// The smart constructors fold constants exactly and drop neutral elements
/// (0 in sums, 1 in products, x^1, --x) but never reorder or collect
/// non-constant terms: there is no canonical form, and operator== is plain
/// structural equality.
class Expr {
 public:
  Expr();  // the constant 0
  Expr(std::int64_t value);        // NOLINT(google-explicit-constructor)
  Expr(const Rational& value);     // NOLINT(google-explicit-constructor)

  static Expr constant(const Rational& value);
  static Expr variable(std::string name);

  [[nodiscard]] const Node& node() const { return *node_; }
  [[nodiscard]] const Node* id() const { return node_.get(); }
  [[nodiscard]] Kind kind() const;

  [[nodiscard]] bool is_constant() const { return kind() == Kind::Constant; }
  [[nodiscard]] bool is_zero() const;
  [[nodiscard]] bool is_one() const;
  /// Exact value; only valid when is_constant().
  [[nodiscard]] const Rational& value() const;

  [[nodiscard]] std::string str() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  friend Expr make_node(Node n);

  std::shared_ptr<const Node> node_;
};

struct Node {
  Kind kind = Kind::Constant;
  Rational value;            // Constant
  std::string name;          // Variable
  Func func = Func::Exp;     // Function
  int exponent = 0;          // Power
  std::vector<Expr> children;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

Expr sum(std::vector<Expr> terms);
Expr product(std::vector<Expr> factors);
Expr pow(const Expr& base, int exponent);
Expr apply(Func f, const Expr& arg);
inline Expr exp(const Expr& a) { return apply(Func::Exp, a); }
inline Expr log(const Expr& a) { return apply(Func::Log, a); }
inline Expr sqrt(const Expr& a) { return apply(Func::Sqrt, a); }
inline Expr sin(const Expr& a) { return apply(Func::Sin, a); }
inline Expr cos(const Expr& a) { return apply(Func::Cos, a); }

std::string_view func_name(Func f);

/// Parses the expression grammar: identifiers, integer/decimal literals,
/// `+ - * / ^`, the functions exp/log/sqrt/sin/cos, and parentheses.
/// `^` is right-associative and its exponent must fold to an integer.
Expr parse_expr(std::string_view text);

/// Exact partial derivative. Shared subexpressions are differentiated once.
Expr differentiate(const Expr& e, const std::string& var);
/// Repeated partial derivative, e.g. {"s","s"} for the second s-derivative.
Expr differentiate(const Expr& e, const std::vector<std::string>& vars);

/// Simultaneous substitution of variables by expressions.
Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& bindings);

double evaluate(const Expr& e, const EvalPoint& pt);

std::set<std::string> free_variables(const Expr& e);
std::set<std::string> free_variables(const std::vector<Expr>& es);

/// Number of distinct nodes in the expression DAG(s).
std::size_t node_count(const Expr& e);
std::size_t node_count(const std::vector<Expr>& es);

/// Denominators and function arguments that must stay away from zero for the
/// expression to be evaluable: every quotient denominator, every base raised
/// to a negative power, and the arguments of log and sqrt.
std::vector<Expr> singular_guards(const Expr& e);

/// Shorthand for Expr::variable.
inline Expr var(std::string name) { return Expr::variable(std::move(name)); }

}  // namespace paracr
