#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cfc/catalog.hpp"
#include "cfc/oracle.hpp"

using namespace cfc;

namespace {

OutputChannel coord1() {
  OutputChannel ch;
  ch.name = "x";
  ch.value = [](double, const Vec& x) { return x[0]; };
  ch.gradient = [](double, const Vec&) { return Vec(Vec::Ones(1)); };
  ch.time_partial = [](double, const Vec&) { return 0.0; };
  ch.hessian = [](double, const Vec&) { return Mat(Mat::Zero(1, 1)); };
  return ch;
}

GridSpec grid1d(double lo, double hi, int res) {
  GridSpec g;
  g.box = {{lo, hi}};
  g.resolution = res;
  return g;
}

// Symmetric band |x| <= w(t)/2 whose width crosses zero twice; with the trace
// pinned to the center the only violations are genuine empty-set spans.
Consolidation breathing_band(double nu) {
  const auto w = [](double t) { return 1.8 + 3.0 * std::sin(0.45 * t) + std::sin(0.4 * t); };
  const auto wd = [](double t) { return 1.35 * std::cos(0.45 * t) + 0.4 * std::cos(0.4 * t); };
  ConstraintSpec spec{coord1(),
                      FunnelBound{{[=](double t) { return -0.5 * w(t); },
                                   [=](double t) { return -0.5 * wd(t); }},
                                  {[=](double t) { return 0.5 * w(t); },
                                   [=](double t) { return 0.5 * wd(t); }}}};
  return Consolidation(ConstraintSet(1, {spec}), nu);
}

SimulationTrace centered_trace(const Consolidation& c, double t_end, double dt) {
  SimulationTrace tr;
  tr.n = 1;
  tr.r = 1;
  const long rows = std::lround(t_end / dt);
  for (long k = 0; k <= rows; ++k) {
    const double t = static_cast<double>(k) * dt;
    tr.t.push_back(t);
    tr.x.push_back(Vec::Zero(1));
    tr.alpha.push_back(alpha(c, t, Vec::Zero(1)));
  }
  return tr;
}

}  // namespace

TEST_CASE("the grid oracle nails a symmetric funnel maximum") {
  ConstraintSpec spec{coord1(),
                      FunnelBound{TimeFunction::constant(-2.0), TimeFunction::constant(2.0)}};
  const Consolidation c(ConstraintSet(1, {spec}), 10.0);
  const OracleResult res = alpha_star_grid(c, 0.0, grid1d(-3.0, 3.0, 61));
  CHECK(res.alpha_star == doctest::Approx(1.9306852819440055).epsilon(1e-9));
  CHECK(std::abs(res.argmax[0]) < 1e-9);
  CHECK_FALSE(res.on_boundary);
  CHECK(res.alpha_bar_star == 2.0);
}

TEST_CASE("refining the grid never lowers the reported maximum") {
  const Consolidation c(catalog_set("annulus"), 10.0);
  GridSpec g = catalog_roi("annulus");
  double prev = -std::numeric_limits<double>::infinity();
  for (int res : {11, 21, 41, 81}) {  // nested grids
    g.resolution = res;
    g.polish_steps = 200;
    const OracleResult r = alpha_star_grid(c, 0.0, g);
    CHECK(r.alpha_star >= prev - 1e-9);
    prev = r.alpha_star;
  }
  // The ring maximum balances both walls of the radial funnel.
  CHECK(prev == doctest::Approx(3.5 - std::log(2.0) / 10.0).epsilon(1e-3));
}

TEST_CASE("an unbounded margin pins the argmax to the box edge") {
  ConstraintSpec spec{coord1(), LowerBound{TimeFunction::constant(0.0)}};
  const Consolidation c(ConstraintSet(1, {spec}), 5.0);
  const OracleResult res = alpha_star_grid(c, 0.0, grid1d(-3.0, 3.0, 61));
  CHECK(res.on_boundary);
  CHECK(res.argmax[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(res.alpha_star == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("grid preconditions are enforced") {
  const Consolidation c(catalog_set("mixed_static"), 10.0);
  CHECK_THROWS_AS(alpha_star_grid(c, 0.0, grid1d(-3.0, 3.0, 61)), ContractViolation);
  GridSpec g = catalog_roi("mixed_static");
  g.resolution = 1;
  CHECK_THROWS_AS(alpha_star_grid(c, 0.0, g), ContractViolation);
  g = catalog_roi("mixed_static");
  g.box[0] = {2.0, 2.0};
  CHECK_THROWS_AS(alpha_star_grid(c, 0.0, g), ContractViolation);
}

TEST_CASE("the violation audit finds exactly the empty-set window") {
  const Consolidation c = breathing_band(50.0);
  const SimulationTrace tr = centered_trace(c, 20.0, 0.01);
  const ViolationReport rep = violation_report(tr, c, grid1d(-3.0, 3.0, 201), 0.2);

  // The band width has two real roots inside the horizon.
  REQUIRE(rep.infeasible_windows.size() == 1);
  CHECK(std::abs(rep.infeasible_windows[0].t_start - 8.2637833257031683) < 0.15);
  CHECK(std::abs(rep.infeasible_windows[0].t_end - 13.235284138597489) < 0.15);

  // The trace sits at the attainable maximum, so the least-violation gap is
  // essentially zero, and without an estimator the estimation error is zero.
  CHECK(rep.max_gap < 1e-9);
  CHECK(rep.max_gap >= 0.0);
  CHECK(rep.estimation_error_max == 0.0);
}

TEST_CASE("with no violation the audit reports whole-trace statistics") {
  const Consolidation c = breathing_band(50.0);
  const SimulationTrace tr = centered_trace(c, 8.0, 0.01);  // stops before the window
  const ViolationReport rep = violation_report(tr, c, grid1d(-3.0, 3.0, 201), 0.2);
  CHECK(rep.infeasible_windows.empty());
  CHECK(rep.max_gap < 1e-9);

  SimulationTrace empty;
  const ViolationReport none = violation_report(empty, c, grid1d(-3.0, 3.0, 201), 0.2);
  CHECK(none.infeasible_windows.empty());
  CHECK(none.max_gap == 0.0);

  CHECK_THROWS_AS(violation_report(tr, c, grid1d(-3.0, 3.0, 201), 0.2, 1), ContractViolation);
}

TEST_CASE("the boundedness probe clears a compact set and flags an open one") {
  const std::vector<double> radii = {2.0, 5.0, 10.0, 20.0};

  const Consolidation ring(catalog_set("annulus"), 10.0);
  const BoundednessReport ok = check_boundedness_sampled(ring, 0.0, {1.0, 3.5, 8.0, 12.0}, 16);
  CHECK_FALSE(ok.likely_unbounded);
  for (const RayGrowth& ray : ok.rays) CHECK_FALSE(ray.suspicious);

  const Consolidation full(catalog_set("mixed_static"), 10.0);
  CHECK_FALSE(check_boundedness_sampled(full, 0.0, radii, 16).likely_unbounded);

  // Dropping the upper bound opens the set along +x2: the margin stops
  // growing along that ray and the probe must notice.
  const ConstraintSet mixed = catalog_set("mixed_static");
  const Consolidation open_set(ConstraintSet(2, {mixed.specs()[0], mixed.specs()[1]}), 10.0);
  const BoundednessReport bad = check_boundedness_sampled(open_set, 0.0, radii, 16);
  CHECK(bad.likely_unbounded);

  CHECK_THROWS_AS(check_boundedness_sampled(ring, 0.0, {1.0}, 16), ContractViolation);
  CHECK_THROWS_AS(check_boundedness_sampled(ring, 0.0, {2.0, 1.0}, 16), ContractViolation);
  CHECK_THROWS_AS(check_boundedness_sampled(ring, 0.0, radii, 1), ContractViolation);
}

TEST_CASE("the stationary scan isolates the unique balanced maximum") {
  const Consolidation c(catalog_set("two_funnel"), 10.0);
  GridSpec g = catalog_roi("two_funnel");
  g.resolution = 61;
  const auto points = critical_point_scan(c, 0.0, g);
  REQUIRE(points.size() == 1);
  // Both funnel pairs balance at x1 = -0.5, x2 = 0.3 x1^2.
  CHECK(points[0].point[0] == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(points[0].point[1] == doctest::Approx(0.075).epsilon(1e-6));
  CHECK(points[0].grad_norm < 1e-6);
  CHECK(points[0].is_maximum);
  CHECK(points[0].eig_max < 0.0);
}

TEST_CASE("the stationary scan exposes a non-maximum critical point") {
  const Consolidation c(catalog_set("annulus"), 10.0);
  GridSpec g = catalog_roi("annulus");
  g.resolution = 61;
  const auto points = critical_point_scan(c, 0.0, g);
  bool found_center = false;
  for (const CriticalPoint& p : points) {
    if (p.point.norm() < 0.05) {
      found_center = true;
      // The hole's center is a local minimum of the margin, not a maximum.
      CHECK_FALSE(p.is_maximum);
      CHECK(p.eig_min > 0.0);
    }
  }
  CHECK(found_center);
}

TEST_CASE("analytic derivatives agree with finite differences") {
  const Consolidation c(catalog_set("two_funnel_moving"), 10.0);
  GridSpec g = catalog_roi("two_funnel_moving");
  const FdReport rep = fd_validate(c, g, 0.0, 3.0, 40);
  CHECK(rep.pass);
  CHECK(rep.samples == 40);
  CHECK(rep.alpha_grad_rel < 1e-5);
  CHECK(rep.alpha_time_rel < 1e-5);
  CHECK(rep.alpha_hess_rel < 1e-4);
  CHECK(rep.channel_grad_rel < 1e-5);
}

TEST_CASE("a corrupted channel gradient is caught and named") {
  auto specs = catalog_set("mixed_static").specs();
  auto& bad = specs[1].channel;  // h2
  const auto clean = bad.gradient;
  bad.gradient = [clean](double t, const Vec& x) {
    Vec g = clean(t, x);
    g[0] += 0.1;
    return g;
  };
  const Consolidation c(ConstraintSet(2, specs), 10.0);
  const FdReport rep = fd_validate(c, catalog_roi("mixed_static"), 0.0, 1.0, 20);
  CHECK_FALSE(rep.pass);
  CHECK(rep.worst_channel == "h2");
  CHECK(rep.channel_grad_rel > 0.01);
}

TEST_CASE("an empty set validates vacuously") {
  Consolidation c;
  c.nu = 10.0;
  const FdReport rep = fd_validate(c, GridSpec{}, 0.0, 1.0, 20);
  CHECK(rep.pass);
  CHECK(rep.samples == 0);
}
