#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "cfc/errors.hpp"
#include "cfc/time_function.hpp"
#include "cfc/types.hpp"

namespace cfc {

// One constrained output h(t, x1) with analytic first and second derivatives.
struct OutputChannel {
  std::string name;
  std::function<double(double, const Vec&)> value;
  std::function<Vec(double, const Vec&)> gradient;      // d h / d x1
  std::function<double(double, const Vec&)> time_partial;
  std::function<Mat(double, const Vec&)> hessian;       // symmetric n x n
  // Set when the derivatives were synthesized by finite differences. Such
  // channels are meant for validation runs, not production simulation.
  bool fd_derivatives = false;
};

// Channel with value-only definition; derivatives filled in by central
// differences and flagged accordingly.
OutputChannel fd_channel(std::string name, std::function<double(double, const Vec&)> value);

struct FunnelBound {
  TimeFunction lower, upper;
};
struct LowerBound {
  TimeFunction lower;
};
struct UpperBound {
  TimeFunction upper;
};
using BoundKind = std::variant<FunnelBound, LowerBound, UpperBound>;

struct ConstraintSpec {
  OutputChannel channel;
  BoundKind bound;
};

// Ordered constraint collection: all two-sided (funnel) channels first, then
// lower-only, then upper-only. The ordering fixes the layout of the stacked
// margin vector and is enforced at construction.
class ConstraintSet {
 public:
  ConstraintSet() : n_(1) {}
  ConstraintSet(int n, std::vector<ConstraintSpec> specs);

  int n() const { return n_; }
  int channels() const { return static_cast<int>(specs_.size()); }  // m
  int funnels() const { return p_; }                                // p
  int lower_only() const { return q_; }                             // q
  int psi_size() const { return channels() + p_; }
  const std::vector<ConstraintSpec>& specs() const { return specs_; }

 private:
  int n_ = 1;
  int p_ = 0;
  int q_ = 0;
  std::vector<ConstraintSpec> specs_;
};

// Constraint set plus the softmin sharpness used to consolidate it.
struct Consolidation {
  ConstraintSet set;
  double nu = 1.0;

  Consolidation() = default;
  Consolidation(ConstraintSet s, double nu_);
};

enum class Membership {
  inside_smooth,      // alpha > 0: strictly inside the smooth under-approximation
  inside_exact_only,  // alpha <= 0 < alpha_bar: inside the exact region only
  outside,            // alpha_bar <= 0: at least one bound violated
};

// Stacked margins: for each funnel channel the pair (h - lower, upper - h),
// then h - lower for lower-only channels, then upper - h for upper-only ones.
Vec eval_psi(const ConstraintSet& set, double t, const Vec& x1);

// Exact margin: min over psi. Positive iff every bound holds strictly.
double alpha_bar(const ConstraintSet& set, double t, const Vec& x1);

// Smooth softmin under-approximation of alpha_bar at sharpness nu. Always within
// ln(psi_size)/nu below alpha_bar.
double alpha(const Consolidation& c, double t, const Vec& x1);
Vec grad_alpha(const Consolidation& c, double t, const Vec& x1);
double dalpha_dt(const Consolidation& c, double t, const Vec& x1);
Mat hessian_alpha(const Consolidation& c, double t, const Vec& x1);
Membership membership(const Consolidation& c, double t, const Vec& x1);

}  // namespace cfc
