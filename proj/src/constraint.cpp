#include "cfc/constraint.hpp"

#include <cmath>

namespace cfc {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool cond, const char* msg) {
  if (!cond) throw ContractViolation(msg);
}

// Softmin evaluation with the max shifted out: every exponential stays in
// (0, 1], so saturated margins cannot overflow. w are the normalized softmin
// weights (sum to one); a is the consolidated margin.
struct SoftminEval {
  Vec psi;
  Vec w;
  double a;
};

SoftminEval softmin(const Consolidation& c, double t, const Vec& x1) {
  SoftminEval ev;
  ev.psi = eval_psi(c.set, t, x1);
  require(ev.psi.size() > 0, "alpha of an empty constraint set is undefined");
  const double psi_min = ev.psi.minCoeff();
  const Vec e = (-c.nu * (ev.psi.array() - psi_min)).exp();
  const double s = e.sum();
  ev.w = e / s;
  ev.a = psi_min - std::log(s) / c.nu;
  return ev;
}

// Folds the per-psi weights back onto their channels. For a funnel channel the
// two sides pull on the same gradient with opposite signs.
struct ChannelWeight {
  double a;  // signed weight on grad h / hessian h
  double s;  // total weight on grad h grad h^T
};

template <class F>
void fold_channels(const ConstraintSet& set, const Vec& w, F&& f) {
  int k = 0;
  for (const auto& spec : set.specs()) {
    std::visit(overloaded{
                   [&](const FunnelBound&) {
                     const double wl = w[k], wu = w[k + 1];
                     k += 2;
                     f(spec, ChannelWeight{wl - wu, wl + wu});
                   },
                   [&](const LowerBound&) { f(spec, ChannelWeight{w[k], w[k]}); ++k; },
                   [&](const UpperBound&) { f(spec, ChannelWeight{-w[k], w[k]}); ++k; },
               },
               spec.bound);
  }
}

double fd_step(double x) { return 6e-6 * std::max(1.0, std::abs(x)); }

}  // namespace

OutputChannel fd_channel(std::string name, std::function<double(double, const Vec&)> value) {
  OutputChannel ch;
  ch.name = std::move(name);
  ch.value = value;
  ch.gradient = [value](double t, const Vec& x) {
    Vec g(x.size());
    Vec xp = x, xm = x;
    for (int i = 0; i < x.size(); ++i) {
      const double h = fd_step(x[i]);
      xp[i] = x[i] + h;
      xm[i] = x[i] - h;
      g[i] = (value(t, xp) - value(t, xm)) / (2 * h);
      xp[i] = x[i];
      xm[i] = x[i];
    }
    return g;
  };
  ch.time_partial = [value](double t, const Vec& x) {
    const double h = fd_step(t);
    return (value(t + h, x) - value(t - h, x)) / (2 * h);
  };
  ch.hessian = [value](double t, const Vec& x) {
    // Central second differences; step balances truncation vs roundoff for
    // second derivatives.
    const int n = static_cast<int>(x.size());
    Mat H(n, n);
    const double f0 = value(t, x);
    Vec y = x;
    for (int i = 0; i < n; ++i) {
      const double hi = 1e-4 * std::max(1.0, std::abs(x[i]));
      for (int j = i; j < n; ++j) {
        const double hj = 1e-4 * std::max(1.0, std::abs(x[j]));
        double v;
        if (i == j) {
          y[i] = x[i] + hi;
          const double fp = value(t, y);
          y[i] = x[i] - hi;
          const double fm = value(t, y);
          y[i] = x[i];
          v = (fp - 2 * f0 + fm) / (hi * hi);
        } else {
          y[i] = x[i] + hi;
          y[j] = x[j] + hj;
          const double fpp = value(t, y);
          y[j] = x[j] - hj;
          const double fpm = value(t, y);
          y[i] = x[i] - hi;
          const double fmm = value(t, y);
          y[j] = x[j] + hj;
          const double fmp = value(t, y);
          y[i] = x[i];
          y[j] = x[j];
          v = (fpp - fpm - fmp + fmm) / (4 * hi * hj);
        }
        H(i, j) = v;
        H(j, i) = v;
      }
    }
    return H;
  };
  ch.fd_derivatives = true;
  return ch;
}

ConstraintSet::ConstraintSet(int n, std::vector<ConstraintSpec> specs)
    : n_(n), specs_(std::move(specs)) {
  require(n >= 1, "constraint set needs a positive state dimension");
  // 0: funnels, 1: lower-only, 2: upper-only; must be nondecreasing.
  int stage = 0;
  for (const auto& spec : specs_) {
    const int s = static_cast<int>(spec.bound.index());
    require(s >= stage, "constraint ordering: funnels, then lower-only, then upper-only");
    stage = s;
    if (s == 0) ++p_;
    if (s == 1) ++q_;
    require(static_cast<bool>(spec.channel.value), "channel needs a value callable");
  }
}

Consolidation::Consolidation(ConstraintSet s, double nu_) : set(std::move(s)), nu(nu_) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ContractViolation("consolidation sharpness nu must be positive and finite");
}

Vec eval_psi(const ConstraintSet& set, double t, const Vec& x1) {
  require(x1.size() == set.n(), "eval_psi: state dimension mismatch");
  Vec psi(set.psi_size());
  int k = 0;
  for (const auto& spec : set.specs()) {
    const double h = spec.channel.value(t, x1);
    std::visit(overloaded{
                   [&](const FunnelBound& b) {
                     psi[k++] = h - b.lower.value(t);
                     psi[k++] = b.upper.value(t) - h;
                   },
                   [&](const LowerBound& b) { psi[k++] = h - b.lower.value(t); },
                   [&](const UpperBound& b) { psi[k++] = b.upper.value(t) - h; },
               },
               spec.bound);
  }
  return psi;
}

double alpha_bar(const ConstraintSet& set, double t, const Vec& x1) {
  const Vec psi = eval_psi(set, t, x1);
  require(psi.size() > 0, "alpha_bar of an empty constraint set is undefined");
  return psi.minCoeff();
}

double alpha(const Consolidation& c, double t, const Vec& x1) {
  return softmin(c, t, x1).a;
}

Vec grad_alpha(const Consolidation& c, double t, const Vec& x1) {
  const SoftminEval ev = softmin(c, t, x1);
  Vec g = Vec::Zero(c.set.n());
  fold_channels(c.set, ev.w, [&](const ConstraintSpec& spec, ChannelWeight cw) {
    if (cw.a != 0.0) g += cw.a * spec.channel.gradient(t, x1);
  });
  return g;
}

double dalpha_dt(const Consolidation& c, double t, const Vec& x1) {
  const SoftminEval ev = softmin(c, t, x1);
  // d psi / d t is dh/dt - lower' on the lower side and upper' - dh/dt on the
  // upper side; fold both through the softmin weights directly.
  double out = 0.0;
  int k = 0;
  for (const auto& spec : c.set.specs()) {
    const double ht = spec.channel.time_partial(t, x1);
    std::visit(overloaded{
                   [&](const FunnelBound& b) {
                     out += ev.w[k] * (ht - b.lower.derivative(t));
                     out += ev.w[k + 1] * (b.upper.derivative(t) - ht);
                     k += 2;
                   },
                   [&](const LowerBound& b) { out += ev.w[k++] * (ht - b.lower.derivative(t)); },
                   [&](const UpperBound& b) { out += ev.w[k++] * (b.upper.derivative(t) - ht); },
               },
               spec.bound);
  }
  return out;
}

Mat hessian_alpha(const Consolidation& c, double t, const Vec& x1) {
  const SoftminEval ev = softmin(c, t, x1);
  const int n = c.set.n();
  Mat H = Mat::Zero(n, n);
  Vec g = Vec::Zero(n);
  fold_channels(c.set, ev.w, [&](const ConstraintSpec& spec, ChannelWeight cw) {
    const Vec gi = spec.channel.gradient(t, x1);
    if (cw.a != 0.0) {
      H += cw.a * spec.channel.hessian(t, x1);
      g += cw.a * gi;
    }
    H -= c.nu * cw.s * (gi * gi.transpose());
  });
  H += c.nu * (g * g.transpose());
  // Outer-product evaluation folds scalars into one factor per column, which
  // breaks bitwise symmetry by an ulp. Mirror the lower triangle so the
  // documented symmetry holds exactly.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) H(j, i) = H(i, j);
  return H;
}

Membership membership(const Consolidation& c, double t, const Vec& x1) {
  const SoftminEval ev = softmin(c, t, x1);
  if (ev.a > 0.0) return Membership::inside_smooth;
  if (ev.psi.minCoeff() > 0.0) return Membership::inside_exact_only;
  return Membership::outside;
}

}  // namespace cfc
