#pragma once

#include "cfc/constraint.hpp"

namespace cfc {

// Gradient-flow tracker for the point with the largest attainable margin. The
// flow climbs grad alpha and compensates the drift of the constraint set; the
// gated regularizer eps_g keeps the compensation bounded near critical points.
struct EstimatorParams {
  double k_alpha = 1.0;  // ascent gain, > 0
  double eps_g = 1.0;    // denominator regularizer, > 0
  double mu_chi = 0.1;   // gate width on |grad alpha|, > 0
  Vec x_tilde0;          // start point; empty means "copy x1(0)" at run start
};

struct EstimatorState {
  Vec x_tilde;
  double alpha_hat = 0.0;  // alpha(t, x_tilde), cached for recording
};

Vec estimator_rhs(const Consolidation& c, const EstimatorParams& p, double t, const Vec& x_tilde);

// alpha_hat: the margin the estimator currently believes attainable.
double estimator_output(const Consolidation& c, double t, const Vec& x_tilde);

// Total time derivative of alpha_hat along the estimator flow.
double estimator_output_dot(const Consolidation& c, const EstimatorParams& p, double t,
                            const Vec& x_tilde);

}  // namespace cfc
