#include "cfc/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace cfc {
namespace {

using Op = Expr::Op;

}  // namespace

// Smart constructors fold constants and strip neutral elements so that
// differentiated trees stay small.
class ExprBuilder {
 public:
  static ExprPtr node(Op op, double c, int var, ExprPtr a, ExprPtr b) {
    auto e = std::shared_ptr<Expr>(new Expr());
    e->op = op;
    e->c = c;
    e->var = var;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
  }

  static ExprPtr constant(double v) { return node(Op::constant, v, -1, nullptr, nullptr); }
  static ExprPtr time() { return node(Op::time, 0, -1, nullptr, nullptr); }
  static ExprPtr var(int i) { return node(Op::var, 0, i, nullptr, nullptr); }

  static bool is_const(const ExprPtr& e, double v) { return e->op == Op::constant && e->c == v; }

  static ExprPtr add(ExprPtr x, ExprPtr y) {
    if (x->op == Op::constant && y->op == Op::constant) return constant(x->c + y->c);
    if (is_const(x, 0)) return y;
    if (is_const(y, 0)) return x;
    return node(Op::add, 0, -1, std::move(x), std::move(y));
  }
  static ExprPtr sub(ExprPtr x, ExprPtr y) {
    if (x->op == Op::constant && y->op == Op::constant) return constant(x->c - y->c);
    if (is_const(y, 0)) return x;
    if (is_const(x, 0)) return neg(std::move(y));
    return node(Op::sub, 0, -1, std::move(x), std::move(y));
  }
  static ExprPtr mul(ExprPtr x, ExprPtr y) {
    if (x->op == Op::constant && y->op == Op::constant) return constant(x->c * y->c);
    if (is_const(x, 0) || is_const(y, 0)) return constant(0);
    if (is_const(x, 1)) return y;
    if (is_const(y, 1)) return x;
    return node(Op::mul, 0, -1, std::move(x), std::move(y));
  }
  static ExprPtr div(ExprPtr x, ExprPtr y) {
    if (x->op == Op::constant && y->op == Op::constant && y->c != 0)
      return constant(x->c / y->c);
    if (is_const(x, 0)) return constant(0);
    if (is_const(y, 1)) return x;
    return node(Op::div, 0, -1, std::move(x), std::move(y));
  }
  static ExprPtr neg(ExprPtr x) {
    if (x->op == Op::constant) return constant(-x->c);
    if (x->op == Op::neg) return x->a;
    return node(Op::neg, 0, -1, std::move(x), nullptr);
  }
  static ExprPtr pow(ExprPtr x, double expo) {
    if (expo == 0) return constant(1);
    if (expo == 1) return x;
    if (x->op == Op::constant) return constant(std::pow(x->c, expo));
    return node(Op::pow, expo, -1, std::move(x), nullptr);
  }
  static ExprPtr fn(Op op, ExprPtr x) {
    if (x->op == Op::constant) {
      if (op == Op::sin) return constant(std::sin(x->c));
      if (op == Op::cos) return constant(std::cos(x->c));
      return constant(std::exp(x->c));
    }
    return node(op, 0, -1, std::move(x), nullptr);
  }
};

namespace {

using B = ExprBuilder;

class Parser {
 public:
  Parser(const std::string& src, int n, const ParamEnv& params)
      : src_(src), n_(n), params_(params) {}

  ExprPtr run() {
    ExprPtr e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw ScenarioParseError("col " + std::to_string(pos_ + 1) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  ExprPtr expr() {
    ExprPtr e = term();
    for (;;) {
      if (eat('+')) e = B::add(e, term());
      else if (eat('-')) e = B::sub(e, term());
      else return e;
    }
  }

  ExprPtr term() {
    ExprPtr e = unary();
    for (;;) {
      if (eat('*')) e = B::mul(e, unary());
      else if (eat('/')) e = B::div(e, unary());
      else return e;
    }
  }

  ExprPtr unary() {
    if (eat('-')) return B::neg(unary());
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    if (eat('^')) {
      ExprPtr e = unary();
      if (e->op != Op::constant) fail("exponent must fold to a numeric constant");
      return B::pow(base, e->c);
    }
    return base;
  }

  ExprPtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    const char ch = src_[pos_];
    if (ch == '(') {
      ++pos_;
      ExprPtr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') return ident();
    fail(std::string("unexpected character '") + ch + "'");
  }

  ExprPtr number() {
    const char* begin = src_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<size_t>(end - begin);
    return B::constant(v);
  }

  ExprPtr ident() {
    const size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name = src_.substr(start, pos_ - start);
    if (name == "sin" || name == "cos" || name == "exp") {
      if (!eat('(')) fail("expected '(' after " + name);
      ExprPtr arg = expr();
      if (!eat(')')) fail("expected ')'");
      return B::fn(name == "sin" ? Op::sin : name == "cos" ? Op::cos : Op::exp, arg);
    }
    if (name == "t") return B::time();
    if (name == "pi") return B::constant(3.14159265358979323846);
    if (name.rfind("x1_", 0) == 0) {
      const std::string tail = name.substr(3);
      if (tail.empty() || tail.find_first_not_of("0123456789") != std::string::npos)
        fail("malformed state variable " + name);
      const int idx = std::atoi(tail.c_str());
      if (idx < 1 || idx > n_) fail("state variable out of range: " + name);
      return B::var(idx - 1);
    }
    if (auto it = params_.find(name); it != params_.end()) return it->second;
    fail("unknown identifier " + name);
  }

  const std::string& src_;
  size_t pos_ = 0;
  int n_;
  const ParamEnv& params_;
};

}  // namespace

double Expr::eval(double t, const Vec& x1) const {
  switch (op) {
    case Op::constant: return c;
    case Op::time: return t;
    case Op::var:
      if (var >= x1.size()) throw ContractViolation("expression refers to a missing state entry");
      return x1[var];
    case Op::add: return a->eval(t, x1) + b->eval(t, x1);
    case Op::sub: return a->eval(t, x1) - b->eval(t, x1);
    case Op::mul: return a->eval(t, x1) * b->eval(t, x1);
    case Op::div: return a->eval(t, x1) / b->eval(t, x1);
    case Op::neg: return -a->eval(t, x1);
    case Op::pow: return std::pow(a->eval(t, x1), c);
    case Op::sin: return std::sin(a->eval(t, x1));
    case Op::cos: return std::cos(a->eval(t, x1));
    case Op::exp: return std::exp(a->eval(t, x1));
  }
  return 0.0;
}

bool Expr::depends_on_state() const {
  if (op == Op::var) return true;
  if (a && a->depends_on_state()) return true;
  if (b && b->depends_on_state()) return true;
  return false;
}

std::string Expr::text() const {
  switch (op) {
    case Op::constant: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", c);
      return buf;
    }
    case Op::time: return "t";
    case Op::var: return "x1_" + std::to_string(var + 1);
    case Op::add: return "(" + a->text() + " + " + b->text() + ")";
    case Op::sub: return "(" + a->text() + " - " + b->text() + ")";
    case Op::mul: return "(" + a->text() + " * " + b->text() + ")";
    case Op::div: return "(" + a->text() + " / " + b->text() + ")";
    case Op::neg: return "-" + a->text();
    case Op::pow: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", c);
      return "(" + a->text() + ")^" + buf;
    }
    case Op::sin: return "sin(" + a->text() + ")";
    case Op::cos: return "cos(" + a->text() + ")";
    case Op::exp: return "exp(" + a->text() + ")";
  }
  return "";
}

ExprPtr Expr::parse(const std::string& src, int n, const ParamEnv& params) {
  return Parser(src, n, params).run();
}

ExprPtr Expr::constant(double v) { return ExprBuilder::constant(v); }

namespace {

ExprPtr diff(const ExprPtr& e, bool wrt_time, int idx) {
  auto d = [&](const ExprPtr& s) { return diff(s, wrt_time, idx); };
  switch (e->op) {
    case Op::constant: return B::constant(0);
    case Op::time: return B::constant(wrt_time ? 1 : 0);
    case Op::var: return B::constant(!wrt_time && e->var == idx ? 1 : 0);
    case Op::add: return B::add(d(e->a), d(e->b));
    case Op::sub: return B::sub(d(e->a), d(e->b));
    case Op::mul: return B::add(B::mul(d(e->a), e->b), B::mul(e->a, d(e->b)));
    case Op::div:
      return B::div(B::sub(B::mul(d(e->a), e->b), B::mul(e->a, d(e->b))),
                    B::pow(e->b, 2));
    case Op::neg: return B::neg(d(e->a));
    case Op::pow:
      return B::mul(B::mul(B::constant(e->c), B::pow(e->a, e->c - 1)), d(e->a));
    case Op::sin: return B::mul(B::fn(Op::cos, e->a), d(e->a));
    case Op::cos: return B::neg(B::mul(B::fn(Op::sin, e->a), d(e->a)));
    case Op::exp: return B::mul(B::fn(Op::exp, e->a), d(e->a));
  }
  return B::constant(0);
}

}  // namespace

ExprPtr Expr::d_dt(const ExprPtr& e) { return diff(e, true, -1); }
ExprPtr Expr::d_dx(const ExprPtr& e, int i) { return diff(e, false, i); }

OutputChannel expr_channel(std::string name, int n, const ExprPtr& e) {
  if (n < 1) throw ContractViolation("expr_channel: n must be positive");
  OutputChannel ch;
  ch.name = std::move(name);
  ch.value = [e](double t, const Vec& x) { return e->eval(t, x); };
  std::vector<ExprPtr> grads(n);
  for (int i = 0; i < n; ++i) grads[i] = Expr::d_dx(e, i);
  ch.gradient = [grads, n](double t, const Vec& x) {
    Vec g(n);
    for (int i = 0; i < n; ++i) g[i] = grads[i]->eval(t, x);
    return g;
  };
  const ExprPtr dt = Expr::d_dt(e);
  ch.time_partial = [dt](double t, const Vec& x) { return dt->eval(t, x); };
  std::vector<ExprPtr> hess;
  hess.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) hess.push_back(Expr::d_dx(grads[i], j));
  ch.hessian = [hess, n](double t, const Vec& x) {
    Mat H(n, n);
    size_t k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        const double v = hess[k++]->eval(t, x);
        H(i, j) = v;
        H(j, i) = v;
      }
    return H;
  };
  return ch;
}

TimeFunction expr_time_function(const ExprPtr& e) {
  if (e->depends_on_state())
    throw ContractViolation("time function must not depend on state variables");
  const ExprPtr dt = Expr::d_dt(e);
  const Vec empty;
  return {[e, empty](double t) { return e->eval(t, empty); },
          [dt, empty](double t) { return dt->eval(t, empty); }};
}

}  // namespace cfc
