#pragma once

#include <string>
#include <vector>

#include "paracr/expr.hpp"

namespace paracr {

/// Flattened, deduplicated evaluation program for a batch of expressions.
/// Compiling once and evaluating many times is much cheaper than walking the
/// DAG per point.
class Tape {
 public:
  /// Inputs are the free variables of `outputs`, sorted by name.
  explicit Tape(const std::vector<Expr>& outputs);
  /// Inputs in the given order; every free variable must be listed.
  Tape(const std::vector<Expr>& outputs, std::vector<std::string> inputs);

  struct Status {
    bool ok = true;
    const char* error = nullptr;
    double max_abs = 0.0;  // largest |value| of any node, inputs included
  };

  [[nodiscard]] const std::vector<std::string>& inputs() const { return inputs_; }
  [[nodiscard]] std::size_t output_count() const { return outputs_.size(); }
  [[nodiscard]] std::size_t size() const { return ops_.size(); }

  /// Evaluates into `out` (resized to output_count()). Never throws for
  /// numeric trouble: division by |d| < 1e-300, log/sqrt domain errors and
  /// non-finite values are reported through Status.
  Status run(const std::vector<double>& in, std::vector<double>& out) const;
  Status run(const EvalPoint& pt, std::vector<double>& out) const;

 private:
  enum class Op : unsigned char { Const, Input, Sum, Prod, Quot, Pow, Exp, Log, Sqrt, Sin, Cos, Neg };
  struct Instr {
    Op op;
    int a = 0;  // first arg slot, or input index
    int b = 0;  // second arg slot, or arg count, or exponent
    double c = 0.0;
  };

  void compile(const std::vector<Expr>& outputs);

  std::vector<std::string> inputs_;
  std::vector<Instr> ops_;
  std::vector<int> args_;  // n-ary argument lists
  std::vector<int> outputs_;
};

}  // namespace paracr
