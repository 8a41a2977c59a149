#pragma once

#include <variant>

#include "cfc/estimator.hpp"
#include "cfc/time_function.hpp"

namespace cfc {

// Performance bound that decays from rho0 to rho_inf, reaching it exactly at
// t = T with a continuous derivative across T.
struct FiniteTimeBoundParams {
  double T = 1.0;        // > 0
  double beta = 0.5;     // in (0, 1)
  double rho0 = -1.0;    // <= rho_inf; NaN requests the automatic start value
  double rho_inf = 0.0;
};

struct BoundSample {
  double value = 0.0;
  double derivative = 0.0;
};

BoundSample finite_time_bound(const FiniteTimeBoundParams& p, double t);

// Exponential performance funnel for the intermediate backstepping errors.
struct PerfFunnelParams {
  double theta0 = 1.0;     // >= theta_inf; NaN requests the automatic start value
  double theta_inf = 0.1;  // > 0
  double l = 1.0;          // >= 0
};

BoundSample perf_funnel(const PerfFunnelParams& p, double t);

// C1 cubic gates. chi is 1 below zero and fades to 0 at mu_chi; iota is 0
// below zero and rises to 1 at mu. Both have zero slope at the junctions.
double chi_switch(double z, double mu_chi);
double iota_switch(double phi, double mu);
double iota_switch_dphi(double phi, double mu);

struct StaticBound {
  FiniteTimeBoundParams rho;
};

struct AdaptiveBound {
  FiniteTimeBoundParams nominal;  // the bound enforced whenever it is attainable
  double mu = 0.2;                // blend width between nominal and relaxed, > 0
  EstimatorParams estimator;
};

using BoundPolicy = std::variant<StaticBound, AdaptiveBound>;

// Feasibility-adaptive bound: follows the nominal value when the estimated
// attainable margin alpha_hat clears it by mu, else trails alpha_hat - mu.
BoundSample adaptive_bound(const AdaptiveBound& p, double t, double alpha_hat,
                           double alpha_hat_dot);

}  // namespace cfc
