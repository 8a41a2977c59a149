#pragma once

#include <map>
#include <memory>
#include <string>

#include "cfc/constraint.hpp"

namespace cfc {

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;
using ParamEnv = std::map<std::string, ExprPtr>;

// Analytic expression over t and the state components x1_1..x1_n, built from
// numeric literals, + - * / ^ (constant exponent), unary minus, parentheses,
// sin/cos/exp, and named time-only parameters. Differentiation happens on the
// tree, so channels loaded from text get exact derivatives.
class Expr : public std::enable_shared_from_this<Expr> {
 public:
  enum class Op { constant, time, var, add, sub, mul, div, neg, pow, sin, cos, exp };

  double eval(double t, const Vec& x1) const;
  bool depends_on_state() const;
  std::string text() const;

  // n bounds the allowed state variables; params supplies named time functions.
  static ExprPtr parse(const std::string& src, int n, const ParamEnv& params = {});
  static ExprPtr d_dt(const ExprPtr& e);
  static ExprPtr d_dx(const ExprPtr& e, int i);
  static ExprPtr constant(double v);

  Op op;
  double c = 0.0;    // constant payload (also the exponent of pow)
  int var = -1;      // 0-based state index for Op::var
  ExprPtr a, b;

 private:
  Expr() = default;
  friend class ExprBuilder;
};

// Channel over n state components defined by one expression.
OutputChannel expr_channel(std::string name, int n, const ExprPtr& e);

// Time function from a state-free expression.
TimeFunction expr_time_function(const ExprPtr& e);

}  // namespace cfc
