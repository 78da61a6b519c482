#include "paracr/expr.hpp"

#include <cmath>
#include <functional>
#include <unordered_map>
#include <unordered_set>

namespace paracr {

Expr make_node(Node n) { return Expr(std::make_shared<const Node>(std::move(n))); }

namespace {

Node constant_node(const Rational& r) {
  Node n;
  n.kind = Kind::Constant;
  n.value = r;
  return n;
}

const Expr& zero_expr() {
  static const Expr z = make_node(constant_node(Rational(0)));
  return z;
}

}  // namespace

Expr::Expr() : Expr(zero_expr()) {}
Expr::Expr(std::int64_t value) : Expr(constant(Rational(value))) {}
Expr::Expr(const Rational& value) : Expr(constant(value)) {}

Expr Expr::constant(const Rational& value) {
  if (value.is_zero() && zero_expr().node_) return zero_expr();
  return make_node(constant_node(value));
}

Expr Expr::variable(std::string name) {
  if (name.empty()) throw std::invalid_argument("variable name must be nonempty");
  Node n;
  n.kind = Kind::Variable;
  n.name = std::move(name);
  return make_node(std::move(n));
}

Kind Expr::kind() const { return node_->kind; }
bool Expr::is_zero() const { return node_->kind == Kind::Constant && node_->value.is_zero(); }
bool Expr::is_one() const { return node_->kind == Kind::Constant && node_->value.is_one(); }

const Rational& Expr::value() const {
  if (node_->kind != Kind::Constant) throw std::logic_error("value() on a non-constant expression");
  return node_->value;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.id() == b.id()) return true;
  const Node& x = a.node();
  const Node& y = b.node();
  if (x.kind != y.kind || x.children.size() != y.children.size()) return false;
  switch (x.kind) {
    case Kind::Constant:
      return x.value == y.value;
    case Kind::Variable:
      return x.name == y.name;
    case Kind::Power:
      if (x.exponent != y.exponent) return false;
      break;
    case Kind::Function:
      if (x.func != y.func) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < x.children.size(); ++i) {
    if (!(x.children[i] == y.children[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Smart constructors

Expr sum(std::vector<Expr> terms) {
  Rational c(0);
  std::vector<Expr> rest;
  rest.reserve(terms.size());
  std::function<void(const Expr&)> push = [&](const Expr& t) {
    if (t.kind() == Kind::Constant) {
      c = c + t.value();
    } else if (t.kind() == Kind::Sum) {
      for (const auto& ch : t.node().children) push(ch);
    } else {
      rest.push_back(t);
    }
  };
  for (const auto& t : terms) push(t);
  if (rest.empty()) return Expr::constant(c);
  if (c.is_zero() && rest.size() == 1) return rest.front();
  Node n;
  n.kind = Kind::Sum;
  if (!c.is_zero()) n.children.push_back(Expr::constant(c));
  for (auto& r : rest) n.children.push_back(std::move(r));
  return make_node(std::move(n));
}

Expr product(std::vector<Expr> factors) {
  Rational c(1);
  std::vector<Expr> rest;
  rest.reserve(factors.size());
  std::function<void(const Expr&)> push = [&](const Expr& f) {
    if (f.kind() == Kind::Constant) {
      c = c * f.value();
    } else if (f.kind() == Kind::Product) {
      for (const auto& ch : f.node().children) push(ch);
    } else {
      rest.push_back(f);
    }
  };
  for (const auto& f : factors) push(f);
  if (c.is_zero()) return Expr(0);
  if (rest.empty()) return Expr::constant(c);
  if (rest.size() == 1 && c.is_one()) return rest.front();
  if (c == Rational(-1)) return -product(std::move(rest));
  Node n;
  n.kind = Kind::Product;
  if (!c.is_one()) n.children.push_back(Expr::constant(c));
  for (auto& r : rest) n.children.push_back(std::move(r));
  return make_node(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return sum({a, b});
}

Expr operator-(const Expr& a) {
  if (a.kind() == Kind::Constant) return Expr::constant(-a.value());
  if (a.kind() == Kind::Negate) return a.node().children.front();
  Node n;
  n.kind = Kind::Negate;
  n.children.push_back(a);
  return make_node(std::move(n));
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  return sum({a, -b});
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr(0);
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  return product({a, b});
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.kind() == Kind::Constant) {
    if (b.value().is_zero()) {
      Node n;
      n.kind = Kind::Quotient;
      n.children = {a, b};
      return make_node(std::move(n));
    }
    return Expr::constant(Rational(1) / b.value()) * a;
  }
  if (a.is_zero()) return Expr(0);
  Node n;
  n.kind = Kind::Quotient;
  n.children = {a, b};
  return make_node(std::move(n));
}

Expr pow(const Expr& base, int exponent) {
  if (exponent == 0) return Expr(1);
  if (exponent == 1) return base;
  if (base.kind() == Kind::Constant) {
    if (!(base.value().is_zero() && exponent < 0)) return Expr::constant(base.value().pow(exponent));
  }
  if (base.kind() == Kind::Power) {
    const long long combined = static_cast<long long>(base.node().exponent) * exponent;
    if (combined <= 1000 && combined >= -1000) return pow(base.node().children.front(), static_cast<int>(combined));
  }
  Node n;
  n.kind = Kind::Power;
  n.exponent = exponent;
  n.children.push_back(base);
  return make_node(std::move(n));
}

Expr apply(Func f, const Expr& arg) {
  if (arg.kind() == Kind::Constant) {
    const Rational& v = arg.value();
    switch (f) {
      case Func::Exp:
        if (v.is_zero()) return Expr(1);
        break;
      case Func::Log:
        if (v.is_one()) return Expr(0);
        break;
      case Func::Sqrt:
        if (v.is_zero() || v.is_one()) return arg;
        break;
      case Func::Sin:
        if (v.is_zero()) return Expr(0);
        break;
      case Func::Cos:
        if (v.is_zero()) return Expr(1);
        break;
    }
  }
  Node n;
  n.kind = Kind::Function;
  n.func = f;
  n.children.push_back(arg);
  return make_node(std::move(n));
}

std::string_view func_name(Func f) {
  switch (f) {
    case Func::Exp:
      return "exp";
    case Func::Log:
      return "log";
    case Func::Sqrt:
      return "sqrt";
    case Func::Sin:
      return "sin";
    case Func::Cos:
      return "cos";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Printing. Every node is printed so that parse_expr() rebuilds the same tree.

namespace {

// 1 sum, 2 product/quotient, 3 unary minus, 4 power, 5 atom
int print_level(const Expr& e) {
  switch (e.kind()) {
    case Kind::Sum:
      return 1;
    case Kind::Product:
    case Kind::Quotient:
      return 2;
    case Kind::Negate:
      return 3;
    case Kind::Power:
      return 4;
    case Kind::Constant:
      if (e.value().is_negative()) return 3;
      return e.value().is_integer() ? 5 : 2;
    default:
      return 5;
  }
}

void print(const Expr& e, std::string& out);

void print_min(const Expr& e, int min_level, std::string& out) {
  if (print_level(e) < min_level) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

void print(const Expr& e, std::string& out) {
  const Node& n = e.node();
  switch (n.kind) {
    case Kind::Constant:
      out += n.value.str();
      return;
    case Kind::Variable:
      out += n.name;
      return;
    case Kind::Sum:
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        const Expr& c = n.children[i];
        if (i == 0) {
          print(c, out);
        } else if (c.kind() == Kind::Negate) {
          out += " - ";
          print_min(c.node().children.front(), 2, out);
        } else {
          out += " + ";
          print_min(c, 2, out);
        }
      }
      return;
    case Kind::Product:
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        const Expr& c = n.children[i];
        if (i > 0) out += '*';
        if (i == 0 && c.kind() == Kind::Constant) {
          print(c, out);
        } else {
          print_min(c, 4, out);
        }
      }
      return;
    case Kind::Quotient:
      print_min(n.children[0], 2, out);
      out += '/';
      print_min(n.children[1], 3, out);
      return;
    case Kind::Power:
      print_min(n.children[0], 5, out);
      out += '^';
      if (n.exponent < 0) {
        out += "(" + std::to_string(n.exponent) + ")";
      } else {
        out += std::to_string(n.exponent);
      }
      return;
    case Kind::Function:
      out += func_name(n.func);
      out += '(';
      print(n.children[0], out);
      out += ')';
      return;
    case Kind::Negate:
      out += '-';
      print_min(n.children[0], 3, out);
      return;
  }
}

}  // namespace

std::string Expr::str() const {
  std::string out;
  print(*this, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    std::vector<Expr> terms{parse_term()};
    for (;;) {
      if (accept('+')) {
        terms.push_back(parse_term());
      } else if (accept('-')) {
        terms.push_back(-parse_term());
      } else {
        break;
      }
    }
    return terms.size() == 1 ? terms.front() : sum(std::move(terms));
  }

  Expr parse_term() {
    Expr acc = parse_unary();
    for (;;) {
      if (accept('*')) {
        acc = acc * parse_unary();
      } else if (accept('/')) {
        const std::size_t at = pos_;
        Expr den = parse_unary();
        if (den.is_zero()) throw ParseError("division by the constant zero", at);
        acc = acc / den;
      } else {
        return acc;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    skip_ws();
    if (accept('^')) {
      const std::size_t at = pos_;
      Expr ex = parse_unary();
      if (!ex.is_constant() || !ex.value().is_integer()) throw ParseError("exponent must be an integer constant", at);
      const auto k = ex.value().num();
      if (k > 1000 || k < -1000) throw ParseError("exponent out of range", at);
      if (base.is_zero() && k < 0) throw ParseError("zero raised to a negative power", at);
      return pow(base, static_cast<int>(k));
    }
    return base;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      std::string name(text_.substr(start, pos_ - start));
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        static const std::map<std::string, Func, std::less<>> funcs = {
            {"exp", Func::Exp}, {"log", Func::Log}, {"sqrt", Func::Sqrt}, {"sin", Func::Sin}, {"cos", Func::Cos}};
        auto it = funcs.find(name);
        if (it == funcs.end()) throw ParseError("unknown function '" + name + "'", start);
        ++pos_;
        Expr arg = parse_sum();
        if (!accept(')')) throw ParseError("expected ')'", pos_);
        return apply(it->second, arg);
      }
      return Expr::variable(std::move(name));
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    try {
      return Expr::constant(Rational::from_decimal(std::string(text_.substr(start, pos_ - start))));
    } catch (const std::exception& ex) {
      throw ParseError(ex.what(), start);
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Differentiation and substitution

namespace {

struct Differentiator {
  const std::string& var;
  std::unordered_map<const Node*, Expr> memo;

  Expr operator()(const Expr& e) {
    auto it = memo.find(e.id());
    if (it != memo.end()) return it->second;
    Expr d = compute(e);
    memo.emplace(e.id(), d);
    return d;
  }

  Expr compute(const Expr& e) {
    const Node& n = e.node();
    switch (n.kind) {
      case Kind::Constant:
        return Expr(0);
      case Kind::Variable:
        return Expr(n.name == var ? 1 : 0);
      case Kind::Sum: {
        std::vector<Expr> terms;
        for (const auto& c : n.children) {
          Expr dc = (*this)(c);
          if (!dc.is_zero()) terms.push_back(dc);
        }
        return sum(std::move(terms));
      }
      case Kind::Product: {
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          Expr dc = (*this)(n.children[i]);
          if (dc.is_zero()) continue;
          std::vector<Expr> f = n.children;
          f[i] = dc;
          terms.push_back(product(std::move(f)));
        }
        return sum(std::move(terms));
      }
      case Kind::Quotient: {
        const Expr& a = n.children[0];
        const Expr& b = n.children[1];
        Expr da = (*this)(a);
        Expr db = (*this)(b);
        if (db.is_zero()) return da / b;
        // a / B^k -> (a' B - k a B') / B^(k+1), so repeated derivatives
        // grow the denominator's exponent linearly rather than doubling it.
        if (b.kind() == Kind::Power && b.node().exponent > 0 && b.node().exponent < 1000) {
          const Expr& B = b.node().children.front();
          const int k = b.node().exponent;
          return (da * B - product({Expr(k), a, (*this)(B)})) / pow(B, k + 1);
        }
        return (da * b - a * db) / pow(b, 2);
      }
      case Kind::Power: {
        const Expr& b = n.children[0];
        Expr db = (*this)(b);
        if (db.is_zero()) return Expr(0);
        return product({Expr(n.exponent), pow(b, n.exponent - 1), db});
      }
      case Kind::Function: {
        const Expr& a = n.children[0];
        Expr da = (*this)(a);
        if (da.is_zero()) return Expr(0);
        switch (n.func) {
          case Func::Exp:
            return e * da;
          case Func::Log:
            return da / a;
          case Func::Sqrt:
            return da / (Expr(2) * e);
          case Func::Sin:
            return cos(a) * da;
          case Func::Cos:
            return -(sin(a) * da);
        }
        return Expr(0);
      }
      case Kind::Negate:
        return -(*this)(n.children[0]);
    }
    return Expr(0);
  }
};

Expr rebuild(const Expr& e, std::vector<Expr> children) {
  const Node& n = e.node();
  switch (n.kind) {
    case Kind::Sum:
      return sum(std::move(children));
    case Kind::Product:
      return product(std::move(children));
    case Kind::Quotient:
      return children[0] / children[1];
    case Kind::Power:
      return pow(children[0], n.exponent);
    case Kind::Function:
      return apply(n.func, children[0]);
    case Kind::Negate:
      return -children[0];
    default:
      return e;
  }
}

}  // namespace

Expr differentiate(const Expr& e, const std::string& var) {
  Differentiator d{var, {}};
  return d(e);
}

Expr differentiate(const Expr& e, const std::vector<std::string>& vars) {
  Expr r = e;
  for (const auto& v : vars) r = differentiate(r, v);
  return r;
}

Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& bindings) {
  std::unordered_map<const Node*, Expr> memo;
  std::function<Expr(const Expr&)> go = [&](const Expr& x) -> Expr {
    auto it = memo.find(x.id());
    if (it != memo.end()) return it->second;
    Expr r = x;
    const Node& n = x.node();
    if (n.kind == Kind::Variable) {
      auto b = bindings.find(n.name);
      if (b != bindings.end()) r = b->second;
    } else if (!n.children.empty()) {
      std::vector<Expr> ch;
      ch.reserve(n.children.size());
      bool changed = false;
      for (const auto& c : n.children) {
        ch.push_back(go(c));
        changed = changed || ch.back().id() != c.id();
      }
      if (changed) r = rebuild(x, std::move(ch));
    }
    memo.emplace(x.id(), r);
    return r;
  };
  return go(e);
}

// ---------------------------------------------------------------------------
// Traversals

namespace {

template <class Visit>
void visit_unique(const std::vector<Expr>& roots, Visit&& visit) {
  std::unordered_set<const Node*> seen;
  std::vector<const Expr*> stack;
  for (const auto& r : roots) stack.push_back(&r);
  while (!stack.empty()) {
    const Expr* e = stack.back();
    stack.pop_back();
    if (!seen.insert(e->id()).second) continue;
    visit(*e);
    for (const auto& c : e->node().children) stack.push_back(&c);
  }
}

}  // namespace

std::set<std::string> free_variables(const std::vector<Expr>& es) {
  std::set<std::string> out;
  visit_unique(es, [&](const Expr& e) {
    if (e.kind() == Kind::Variable) out.insert(e.node().name);
  });
  return out;
}

std::set<std::string> free_variables(const Expr& e) { return free_variables(std::vector<Expr>{e}); }

std::size_t node_count(const std::vector<Expr>& es) {
  std::size_t n = 0;
  visit_unique(es, [&](const Expr&) { ++n; });
  return n;
}

std::size_t node_count(const Expr& e) { return node_count(std::vector<Expr>{e}); }

std::vector<Expr> singular_guards(const Expr& e) {
  std::vector<Expr> out;
  visit_unique({e}, [&](const Expr& x) {
    const Node& n = x.node();
    if (n.kind == Kind::Quotient) out.push_back(n.children[1]);
    if (n.kind == Kind::Power && n.exponent < 0) out.push_back(n.children[0]);
    if (n.kind == Kind::Function && (n.func == Func::Log || n.func == Func::Sqrt)) out.push_back(n.children[0]);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation (tree walk with memoisation; the Tape in tape.hpp is the fast path)

double evaluate(const Expr& e, const EvalPoint& pt) {
  std::unordered_map<const Node*, double> memo;
  std::function<double(const Expr&)> go = [&](const Expr& x) -> double {
    auto it = memo.find(x.id());
    if (it != memo.end()) return it->second;
    const Node& n = x.node();
    double v = 0.0;
    switch (n.kind) {
      case Kind::Constant:
        v = n.value.to_double();
        break;
      case Kind::Variable: {
        auto b = pt.find(n.name);
        if (b == pt.end()) throw EvalError("unbound variable '" + n.name + "'");
        v = b->second;
        break;
      }
      case Kind::Sum:
        for (const auto& c : n.children) v += go(c);
        break;
      case Kind::Product:
        v = 1.0;
        for (const auto& c : n.children) v *= go(c);
        break;
      case Kind::Quotient: {
        const double num = go(n.children[0]);
        const double den = go(n.children[1]);
        if (std::abs(den) < 1e-300) throw EvalError("division by zero");
        v = num / den;
        break;
      }
      case Kind::Power: {
        const double b = go(n.children[0]);
        if (n.exponent < 0 && std::abs(b) < 1e-300) throw EvalError("division by zero");
        v = std::pow(b, n.exponent);
        break;
      }
      case Kind::Function: {
        const double a = go(n.children[0]);
        switch (n.func) {
          case Func::Exp:
            v = std::exp(a);
            break;
          case Func::Log:
            if (a <= 0.0) throw EvalError("log of a nonpositive value");
            v = std::log(a);
            break;
          case Func::Sqrt:
            if (a < 0.0) throw EvalError("sqrt of a negative value");
            v = std::sqrt(a);
            break;
          case Func::Sin:
            v = std::sin(a);
            break;
          case Func::Cos:
            v = std::cos(a);
            break;
        }
        break;
      }
      case Kind::Negate:
        v = -go(n.children[0]);
        break;
    }
    memo.emplace(x.id(), v);
    return v;
  };
  return go(e);
}

}  // namespace paracr
