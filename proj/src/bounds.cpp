#include "cfc/bounds.hpp"

#include <cmath>

#include "cfc/errors.hpp"

namespace cfc {
namespace {

void check(const FiniteTimeBoundParams& p) {
  if (!(p.T > 0.0)) throw ContractViolation("finite-time bound: T must be positive");
  if (!(p.beta > 0.0 && p.beta < 1.0)) throw ContractViolation("finite-time bound: beta must lie in (0,1)");
  if (!std::isnan(p.rho0) && !(p.rho0 <= p.rho_inf))
    throw ContractViolation("finite-time bound: rho0 must not exceed rho_inf");
}

void check(const PerfFunnelParams& p) {
  if (!(p.theta_inf > 0.0)) throw ContractViolation("performance funnel: theta_inf must be positive");
  if (!std::isnan(p.theta0) && !(p.theta0 >= p.theta_inf))
    throw ContractViolation("performance funnel: theta0 must not fall below theta_inf");
  if (!(p.l >= 0.0)) throw ContractViolation("performance funnel: decay rate must be nonnegative");
}

}  // namespace

BoundSample finite_time_bound(const FiniteTimeBoundParams& p, double t) {
  check(p);
  if (std::isnan(p.rho0)) throw ContractViolation("finite-time bound: rho0 unresolved (auto value not filled in)");
  if (t == 0.0) return {p.rho0, -(1.0 / (p.T * (1.0 - p.beta))) * (p.rho0 - p.rho_inf)};
  if (t >= p.T) return {p.rho_inf, 0.0};
  const double s = (p.T - t) / p.T;
  const double expo = 1.0 / (1.0 - p.beta);
  const double diff = p.rho0 - p.rho_inf;
  return {std::pow(s, expo) * diff + p.rho_inf, -(expo / p.T) * std::pow(s, expo - 1.0) * diff};
}

BoundSample perf_funnel(const PerfFunnelParams& p, double t) {
  check(p);
  if (std::isnan(p.theta0)) throw ContractViolation("performance funnel: theta0 unresolved (auto value not filled in)");
  if (t == 0.0) return {p.theta0, -p.l * (p.theta0 - p.theta_inf)};
  const double decay = (p.theta0 - p.theta_inf) * std::exp(-p.l * t);
  return {decay + p.theta_inf, -p.l * decay};
}

double chi_switch(double z, double mu_chi) {
  if (!(mu_chi > 0.0)) throw ContractViolation("chi gate: mu_chi must be positive");
  if (z <= 0.0) return 1.0;
  if (z >= mu_chi) return 0.0;
  const double r = z / mu_chi;
  return 1.0 + r * r * (2.0 * r - 3.0);
}

double iota_switch(double phi, double mu) {
  if (!(mu > 0.0)) throw ContractViolation("iota gate: mu must be positive");
  if (phi <= 0.0) return 0.0;
  if (phi >= mu) return 1.0;
  const double r = phi / mu;
  return r * r * (3.0 - 2.0 * r);
}

double iota_switch_dphi(double phi, double mu) {
  if (!(mu > 0.0)) throw ContractViolation("iota gate: mu must be positive");
  if (phi <= 0.0 || phi >= mu) return 0.0;
  const double r = phi / mu;
  return 6.0 * r * (1.0 - r) / mu;
}

BoundSample adaptive_bound(const AdaptiveBound& p, double t, double alpha_hat,
                           double alpha_hat_dot) {
  if (!(p.mu > 0.0)) throw ContractViolation("adaptive bound: mu must be positive");
  const BoundSample nom = finite_time_bound(p.nominal, t);
  const double phi = alpha_hat - nom.value;
  const double iota = iota_switch(phi, p.mu);
  const double iota_dot = iota_switch_dphi(phi, p.mu) * (alpha_hat_dot - nom.derivative);
  return {iota * nom.value + (1.0 - iota) * (alpha_hat - p.mu),
          iota_dot * (nom.value - alpha_hat + p.mu) + iota * nom.derivative +
              (1.0 - iota) * alpha_hat_dot};
}

}  // namespace cfc
