#include "paracr/tape.hpp"

#include <cmath>
#include <unordered_map>

namespace paracr {

Tape::Tape(const std::vector<Expr>& outputs) {
  const auto vars = free_variables(outputs);
  inputs_.assign(vars.begin(), vars.end());
  compile(outputs);
}

Tape::Tape(const std::vector<Expr>& outputs, std::vector<std::string> inputs) : inputs_(std::move(inputs)) {
  for (const auto& v : free_variables(outputs)) {
    bool found = false;
    for (const auto& i : inputs_) found = found || i == v;
    if (!found) throw std::invalid_argument("tape input list misses variable '" + v + "'");
  }
  compile(outputs);
}

void Tape::compile(const std::vector<Expr>& outputs) {
  std::unordered_map<std::string, int> input_index;
  for (std::size_t i = 0; i < inputs_.size(); ++i) input_index.emplace(inputs_[i], static_cast<int>(i));
  std::unordered_map<const Node*, int> slot;

  // Iterative post-order so that deep expressions do not blow the stack.
  for (const auto& root : outputs) {
    std::vector<std::pair<const Expr*, bool>> stack{{&root, false}};
    while (!stack.empty()) {
      auto [e, expanded] = stack.back();
      stack.pop_back();
      if (slot.count(e->id())) continue;
      const Node& n = e->node();
      if (!expanded) {
        stack.emplace_back(e, true);
        for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) {
          if (!slot.count(it->id())) stack.emplace_back(&*it, false);
        }
        continue;
      }
      Instr ins{Op::Const};
      switch (n.kind) {
        case Kind::Constant:
          ins.op = Op::Const;
          ins.c = n.value.to_double();
          break;
        case Kind::Variable:
          ins.op = Op::Input;
          ins.a = input_index.at(n.name);
          break;
        case Kind::Sum:
        case Kind::Product:
          ins.op = n.kind == Kind::Sum ? Op::Sum : Op::Prod;
          ins.a = static_cast<int>(args_.size());
          ins.b = static_cast<int>(n.children.size());
          for (const auto& c : n.children) args_.push_back(slot.at(c.id()));
          break;
        case Kind::Quotient:
          ins.op = Op::Quot;
          ins.a = slot.at(n.children[0].id());
          ins.b = slot.at(n.children[1].id());
          break;
        case Kind::Power:
          ins.op = Op::Pow;
          ins.a = slot.at(n.children[0].id());
          ins.b = n.exponent;
          break;
        case Kind::Function:
          switch (n.func) {
            case Func::Exp: ins.op = Op::Exp; break;
            case Func::Log: ins.op = Op::Log; break;
            case Func::Sqrt: ins.op = Op::Sqrt; break;
            case Func::Sin: ins.op = Op::Sin; break;
            case Func::Cos: ins.op = Op::Cos; break;
          }
          ins.a = slot.at(n.children[0].id());
          break;
        case Kind::Negate:
          ins.op = Op::Neg;
          ins.a = slot.at(n.children[0].id());
          break;
      }
      slot.emplace(e->id(), static_cast<int>(ops_.size()));
      ops_.push_back(ins);
    }
    outputs_.push_back(slot.at(root.id()));
  }
}

namespace {

double ipow(double b, int n) {
  if (n < 0) return 1.0 / ipow(b, -n);
  double r = 1.0;
  while (n > 0) {
    if (n & 1) r *= b;
    n >>= 1;
    if (n > 0) b *= b;
  }
  return r;
}

}  // namespace

Tape::Status Tape::run(const std::vector<double>& in, std::vector<double>& out) const {
  if (in.size() != inputs_.size()) throw std::invalid_argument("tape input size mismatch");
  std::vector<double> v(ops_.size());
  Status st;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const Instr& ins = ops_[i];
    double r = 0.0;
    switch (ins.op) {
      case Op::Const:
        r = ins.c;
        break;
      case Op::Input:
        r = in[static_cast<std::size_t>(ins.a)];
        break;
      case Op::Sum:
        for (int k = 0; k < ins.b; ++k) r += v[static_cast<std::size_t>(args_[static_cast<std::size_t>(ins.a + k)])];
        break;
      case Op::Prod:
        r = 1.0;
        for (int k = 0; k < ins.b; ++k) r *= v[static_cast<std::size_t>(args_[static_cast<std::size_t>(ins.a + k)])];
        break;
      case Op::Quot: {
        const double d = v[static_cast<std::size_t>(ins.b)];
        if (std::abs(d) < 1e-300) return {false, "division by zero", st.max_abs};
        r = v[static_cast<std::size_t>(ins.a)] / d;
        break;
      }
      case Op::Pow: {
        const double b = v[static_cast<std::size_t>(ins.a)];
        if (ins.b < 0 && std::abs(b) < 1e-300) return {false, "division by zero", st.max_abs};
        r = ipow(b, ins.b);
        break;
      }
      case Op::Exp:
        r = std::exp(v[static_cast<std::size_t>(ins.a)]);
        break;
      case Op::Log: {
        const double a = v[static_cast<std::size_t>(ins.a)];
        if (a <= 0.0) return {false, "log of a nonpositive value", st.max_abs};
        r = std::log(a);
        break;
      }
      case Op::Sqrt: {
        const double a = v[static_cast<std::size_t>(ins.a)];
        if (a < 0.0) return {false, "sqrt of a negative value", st.max_abs};
        r = std::sqrt(a);
        break;
      }
      case Op::Sin:
        r = std::sin(v[static_cast<std::size_t>(ins.a)]);
        break;
      case Op::Cos:
        r = std::cos(v[static_cast<std::size_t>(ins.a)]);
        break;
      case Op::Neg:
        r = -v[static_cast<std::size_t>(ins.a)];
        break;
    }
    if (!std::isfinite(r)) return {false, "non-finite value", st.max_abs};
    v[i] = r;
    st.max_abs = std::max(st.max_abs, std::abs(r));
  }
  out.resize(outputs_.size());
  for (std::size_t k = 0; k < outputs_.size(); ++k) out[k] = v[static_cast<std::size_t>(outputs_[k])];
  return st;
}

Tape::Status Tape::run(const EvalPoint& pt, std::vector<double>& out) const {
  std::vector<double> in(inputs_.size());
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    auto it = pt.find(inputs_[i]);
    if (it == pt.end()) throw EvalError("unbound variable '" + inputs_[i] + "'");
    in[i] = it->second;
  }
  return run(in, out);
}

}  // namespace paracr
