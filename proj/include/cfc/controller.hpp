#pragma once

#include <vector>

#include "cfc/bounds.hpp"
#include "cfc/constraint.hpp"

namespace cfc {

// Static backstepping law over the consolidated margin. Level 1 pushes alpha
// away from its bound through a log barrier; levels 2..r keep each
// intermediate error inside a shrinking performance funnel. No derivative of
// any s_i is ever formed.
struct ControllerConfig {
  int r = 1;              // chain length, >= 1
  int n = 1;              // block dimension, matches the constraint set
  std::vector<double> k;  // gains k_1..k_r, all > 0
  double upsilon = 1.0;   // barrier scale, > 0
  double nu = 1.0;        // consolidation sharpness shared with the run
  // funnels[i-2][j]: performance funnel of error level i (2..r), component j.
  std::vector<std::vector<PerfFunnelParams>> funnels;
};

struct ControllerDiagnostics {
  double alpha = 0.0;
  double e_alpha = 0.0;
  double eps_alpha = 0.0;
  std::vector<Vec> e;      // levels 2..r
  std::vector<Vec> e_hat;  // levels 2..r, componentwise e / theta
  std::vector<Vec> xi;     // levels 2..r
  std::vector<Vec> s;      // s_1..s_r
};

// ln(e_alpha / upsilon); throws ConstraintTransformSingularity when
// e_alpha <= 0. Zero exactly at e_alpha == upsilon.
double transform_alpha(double e_alpha, double upsilon, double t = 0.0);

// Level-1 virtual control: -k1 * grad_alpha * eps_alpha / e_alpha.
Vec s1(const Consolidation& c, const ControllerConfig& cfg, double rho_alpha, double t,
       const Vec& x1);

Vec intermediate_error(const Vec& x_i, const Vec& s_prev);

struct FunnelTransform {
  Vec e_hat;
  Vec eps;
  Vec xi;
};

// Normalizes e by the funnel widths and applies the symmetric log transform.
// Throws IntermediateFunnelSingularity when any |e_hat| reaches 1.
FunnelTransform normalize_and_transform(const Vec& e_i,
                                        const std::vector<BoundSample>& theta_i, int level,
                                        double t);

// Componentwise -k_i * xi * eps.
Vec s_i(double k_i, const Vec& xi, const Vec& eps);

// Full law: u = s_r for the stacked state x = [x_1; ...; x_r]. bound.derivative
// is accepted for interface symmetry but unused: the law is static feedback.
Vec control_u(const Consolidation& c, const ControllerConfig& cfg, const BoundSample& bound,
              double t, const Vec& x, ControllerDiagnostics* diag = nullptr);

}  // namespace cfc
