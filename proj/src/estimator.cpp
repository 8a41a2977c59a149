#include "cfc/estimator.hpp"

#include <cmath>

#include "cfc/bounds.hpp"

namespace cfc {
namespace {

void check(const EstimatorParams& p) {
  if (!(p.k_alpha > 0.0)) throw ContractViolation("estimator: k_alpha must be positive");
  if (!(p.eps_g > 0.0)) throw ContractViolation("estimator: eps_g must be positive");
  if (!(p.mu_chi > 0.0)) throw ContractViolation("estimator: mu_chi must be positive");
}

}  // namespace

Vec estimator_rhs(const Consolidation& c, const EstimatorParams& p, double t,
                  const Vec& x_tilde) {
  check(p);
  const Vec g = grad_alpha(c, t, x_tilde);
  const double g2 = g.squaredNorm();
  // The chi gate keeps the denominator at eps_g when the gradient vanishes, so
  // the drift compensation fades out instead of blowing up at critical points.
  const double denom = g2 + p.eps_g * chi_switch(std::sqrt(g2), p.mu_chi);
  return p.k_alpha * g - (dalpha_dt(c, t, x_tilde) / denom) * g;
}

double estimator_output(const Consolidation& c, double t, const Vec& x_tilde) {
  return alpha(c, t, x_tilde);
}

double estimator_output_dot(const Consolidation& c, const EstimatorParams& p, double t,
                            const Vec& x_tilde) {
  return dalpha_dt(c, t, x_tilde) +
         grad_alpha(c, t, x_tilde).dot(estimator_rhs(c, p, t, x_tilde));
}

}  // namespace cfc
