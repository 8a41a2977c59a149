#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cfc/bounds.hpp"
#include "cfc/errors.hpp"

using namespace cfc;

namespace {

FiniteTimeBoundParams ftb(double T, double beta, double rho0, double rho_inf) {
  FiniteTimeBoundParams p;
  p.T = T;
  p.beta = beta;
  p.rho0 = rho0;
  p.rho_inf = rho_inf;
  return p;
}

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TEST_CASE("finite-time bound matches the closed form at an interior time") {
  const auto b = finite_time_bound(ftb(3.0, 0.3, -1.0, 0.0), 1.5);
  CHECK(b.value == doctest::Approx(-0.37149857228423711).epsilon(1e-14));
  CHECK(b.derivative == doctest::Approx(0.35380816408022582).epsilon(1e-14));
}

TEST_CASE("finite-time bound hits its endpoints exactly") {
  const auto p = ftb(3.0, 0.3, -1.0, 0.0);

  const auto at0 = finite_time_bound(p, 0.0);
  CHECK(at0.value == -1.0);
  const double slope0 = -(1.0 / (3.0 * (1.0 - 0.3))) * (-1.0 - 0.0);
  CHECK(at0.derivative == slope0);

  const auto atT = finite_time_bound(p, 3.0);
  CHECK(atT.value == 0.0);
  CHECK(atT.derivative == 0.0);

  const auto after = finite_time_bound(p, 11.0);
  CHECK(after.value == 0.0);
  CHECK(after.derivative == 0.0);

  // Approaching T from below the value closes in on rho_inf.
  const auto near = finite_time_bound(p, 3.0 - 1e-9);
  CHECK(std::abs(near.value) < 1e-9);
}

TEST_CASE("finite-time bound with rho0 == rho_inf is constant") {
  const auto b = finite_time_bound(ftb(1.0, 0.5, 0.25, 0.25), 0.3);
  CHECK(b.value == 0.25);
  CHECK(b.derivative == 0.0);
}

TEST_CASE("finite-time bound rejects malformed parameters") {
  CHECK_THROWS_AS(finite_time_bound(ftb(0.0, 0.3, -1.0, 0.0), 0.5), ContractViolation);
  CHECK_THROWS_AS(finite_time_bound(ftb(-2.0, 0.3, -1.0, 0.0), 0.5), ContractViolation);
  CHECK_THROWS_AS(finite_time_bound(ftb(3.0, 0.0, -1.0, 0.0), 0.5), ContractViolation);
  CHECK_THROWS_AS(finite_time_bound(ftb(3.0, 1.0, -1.0, 0.0), 0.5), ContractViolation);
  CHECK_THROWS_AS(finite_time_bound(ftb(3.0, 1.4, -1.0, 0.0), 0.5), ContractViolation);
  CHECK_THROWS_AS(finite_time_bound(ftb(3.0, 0.3, 0.5, 0.0), 0.5), ContractViolation);
  // An unresolved automatic start value passes validation but cannot be sampled.
  CHECK_THROWS_AS(finite_time_bound(ftb(3.0, 0.3, kNan, 0.0), 0.5), ContractViolation);
}

TEST_CASE("finite-time bound rises monotonically and matches finite differences") {
  const auto p = ftb(3.0, 0.3, -1.0, 0.0);
  double prev = finite_time_bound(p, 0.0).value;
  for (double t = 0.05; t < 3.6; t += 0.05) {
    const auto b = finite_time_bound(p, t);
    CHECK(b.value >= prev - 1e-15);
    CHECK(b.derivative >= 0.0);
    prev = b.value;
    // The curvature blows up right at T, so keep the stencil clear of it.
    if (t > 1e-3 && std::abs(3.0 - t) > 0.1) {
      const double h = 1e-6;
      const double fd = (finite_time_bound(p, t + h).value - finite_time_bound(p, t - h).value) / (2.0 * h);
      CHECK(b.derivative == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("performance funnel decays exponentially toward its floor") {
  PerfFunnelParams p;
  p.theta0 = 1.0;
  p.theta_inf = 0.1;
  p.l = 1.0;

  const auto b = perf_funnel(p, 1.0);
  const double decay = (1.0 - 0.1) * std::exp(-1.0);
  CHECK(b.value == doctest::Approx(0.43109149705429809).epsilon(1e-15));
  CHECK(b.value == decay + 0.1);
  CHECK(b.derivative == -decay);

  const auto at0 = perf_funnel(p, 0.0);
  CHECK(at0.value == 1.0);
  CHECK(at0.derivative == -(1.0 - 0.1));
}

TEST_CASE("performance funnel with zero decay rate stays put") {
  PerfFunnelParams p;
  p.theta0 = 1.0;
  p.theta_inf = 0.25;
  p.l = 0.0;
  const auto b = perf_funnel(p, 7.0);
  CHECK(b.value == 1.0);
  CHECK(b.derivative == 0.0);
}

TEST_CASE("performance funnel rejects malformed parameters") {
  PerfFunnelParams p;
  p.theta0 = 1.0;
  p.theta_inf = 0.0;
  p.l = 1.0;
  CHECK_THROWS_AS(perf_funnel(p, 0.5), ContractViolation);
  p.theta_inf = -1.0;
  CHECK_THROWS_AS(perf_funnel(p, 0.5), ContractViolation);
  p.theta_inf = 0.1;
  p.theta0 = 0.05;
  CHECK_THROWS_AS(perf_funnel(p, 0.5), ContractViolation);
  p.theta0 = 1.0;
  p.l = -0.1;
  CHECK_THROWS_AS(perf_funnel(p, 0.5), ContractViolation);
  p.l = 1.0;
  p.theta0 = kNan;
  CHECK_THROWS_AS(perf_funnel(p, 0.5), ContractViolation);
}

TEST_CASE("chi gate is 1 below zero, 0 above the width, and C1 in between") {
  const double mu = 0.4;
  CHECK(chi_switch(-0.3, mu) == 1.0);
  CHECK(chi_switch(0.0, mu) == 1.0);
  CHECK(chi_switch(mu, mu) == 0.0);
  CHECK(chi_switch(2.0 * mu, mu) == 0.0);
  CHECK(chi_switch(0.5 * mu, mu) == 0.5);

  // Zero slope at both junctions.
  const double h = 1e-7;
  CHECK(std::abs((chi_switch(h, mu) - chi_switch(0.0, mu)) / h) < 1e-5);
  CHECK(std::abs((chi_switch(mu, mu) - chi_switch(mu - h, mu)) / h) < 1e-5);

  // Monotone decrease across the gate.
  double prev = 1.0;
  for (double z = 0.0; z <= mu + 1e-12; z += mu / 40.0) {
    const double c = chi_switch(z, mu);
    CHECK(c <= prev + 1e-15);
    prev = c;
  }

  CHECK_THROWS_AS(chi_switch(0.1, 0.0), ContractViolation);
  CHECK_THROWS_AS(chi_switch(0.1, -1.0), ContractViolation);
}

TEST_CASE("iota gate rises from 0 to 1 and its slope peaks mid-gate") {
  const double mu = 0.2;
  CHECK(iota_switch(-1.0, mu) == 0.0);
  CHECK(iota_switch(0.0, mu) == 0.0);
  CHECK(iota_switch(mu, mu) == 1.0);
  CHECK(iota_switch(5.0, mu) == 1.0);
  CHECK(iota_switch(0.5 * mu, mu) == 0.5);

  CHECK(iota_switch_dphi(-0.1, mu) == 0.0);
  CHECK(iota_switch_dphi(0.0, mu) == 0.0);
  CHECK(iota_switch_dphi(mu, mu) == 0.0);
  CHECK(iota_switch_dphi(0.5 * mu, mu) == 1.5 / mu);

  // The reported slope matches finite differences strictly inside the gate.
  const double h = 1e-8;
  for (double r = 0.1; r < 0.95; r += 0.1) {
    const double phi = r * mu;
    const double fd = (iota_switch(phi + h, mu) - iota_switch(phi - h, mu)) / (2.0 * h);
    CHECK(iota_switch_dphi(phi, mu) == doctest::Approx(fd).epsilon(1e-6));
  }

  double prev = 0.0;
  for (double phi = 0.0; phi <= mu + 1e-12; phi += mu / 40.0) {
    const double v = iota_switch(phi, mu);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }

  CHECK_THROWS_AS(iota_switch(0.1, 0.0), ContractViolation);
  CHECK_THROWS_AS(iota_switch_dphi(0.1, -0.5), ContractViolation);
}

TEST_CASE("adaptive bound reproduces the nominal bound when the margin clears it") {
  AdaptiveBound p;
  p.nominal = ftb(3.0, 0.3, -1.0, 0.0);
  p.mu = 0.2;

  const double t = 1.5;
  const auto nom = finite_time_bound(p.nominal, t);
  const double alpha_hat = nom.value + 0.5;  // clears by more than mu
  const auto b = adaptive_bound(p, t, alpha_hat, 0.7);
  CHECK(b.value == nom.value);
  CHECK(b.derivative == nom.derivative);
}

TEST_CASE("adaptive bound trails the estimated margin when infeasible") {
  AdaptiveBound p;
  p.nominal = ftb(3.0, 0.3, -1.0, 0.0);
  p.mu = 0.2;

  const double t = 1.5;
  const auto nom = finite_time_bound(p.nominal, t);
  const double alpha_hat = nom.value - 0.3;  // below the nominal bound
  const double alpha_hat_dot = -0.4;
  const auto b = adaptive_bound(p, t, alpha_hat, alpha_hat_dot);
  CHECK(b.value == alpha_hat - p.mu);
  CHECK(b.derivative == alpha_hat_dot);
}

TEST_CASE("adaptive bound blends between the regimes and keeps clearance") {
  AdaptiveBound p;
  p.nominal = ftb(3.0, 0.3, -1.0, 0.0);
  p.mu = 0.2;

  const double t = 1.5;
  const auto nom = finite_time_bound(p.nominal, t);
  const double alpha_hat = nom.value + 0.5 * p.mu;  // mid-gate
  const auto b = adaptive_bound(p, t, alpha_hat, 0.0);
  const double lo = std::min(nom.value, alpha_hat - p.mu);
  const double hi = std::max(nom.value, alpha_hat - p.mu);
  CHECK(b.value > lo);
  CHECK(b.value < hi);

  // In every regime the margin estimate clears the bound by the blended width.
  for (double phi = -0.3; phi <= 0.5; phi += 0.017) {
    const double ah = nom.value + phi;
    const auto s = adaptive_bound(p, t, ah, 0.0);
    const double iota = iota_switch(phi, p.mu);
    CHECK(ah - s.value >= (1.0 - iota) * p.mu - 1e-12);
  }
}

TEST_CASE("adaptive bound derivative is the chain rule along a moving estimate") {
  AdaptiveBound p;
  p.nominal = ftb(3.0, 0.3, -1.0, 0.0);
  p.mu = 0.2;

  // alpha_hat wanders through both regimes and across the gate knots.
  const auto ah = [&](double t) {
    return finite_time_bound(p.nominal, t).value + 0.18 + 0.1 * std::sin(3.0 * t);
  };
  const auto ah_dot = [&](double t) {
    return finite_time_bound(p.nominal, t).derivative + 0.3 * std::cos(3.0 * t);
  };
  const auto value = [&](double t) { return adaptive_bound(p, t, ah(t), ah_dot(t)).value; };

  const double h = 1e-6;
  for (double t = 0.1; t < 2.85; t += 0.1) {
    const auto b = adaptive_bound(p, t, ah(t), ah_dot(t));
    const double fd = (value(t + h) - value(t - h)) / (2.0 * h);
    CHECK(b.derivative == doctest::Approx(fd).epsilon(5e-5));
  }
}

TEST_CASE("adaptive bound rejects a nonpositive blend width") {
  AdaptiveBound p;
  p.nominal = ftb(3.0, 0.3, -1.0, 0.0);
  p.mu = 0.0;
  CHECK_THROWS_AS(adaptive_bound(p, 1.0, 0.0, 0.0), ContractViolation);
  p.mu = -0.2;
  CHECK_THROWS_AS(adaptive_bound(p, 1.0, 0.0, 0.0), ContractViolation);
}
