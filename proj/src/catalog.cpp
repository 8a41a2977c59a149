#include "cfc/catalog.hpp"

#include <cmath>

#include "cfc/errors.hpp"

namespace cfc {
namespace {

OutputChannel coordinate(std::string name, int n, int i) {
  OutputChannel ch;
  ch.name = std::move(name);
  ch.value = [i](double, const Vec& x) { return x[i]; };
  ch.gradient = [n, i](double, const Vec&) { return Vec(Vec::Unit(n, i)); };
  ch.time_partial = [](double, const Vec&) { return 0.0; };
  ch.hessian = [n](double, const Vec&) { return Mat(Mat::Zero(n, n)); };
  return ch;
}

OutputChannel affine2(std::string name, double a1, double a2) {
  OutputChannel ch;
  ch.name = std::move(name);
  ch.value = [a1, a2](double, const Vec& x) { return a1 * x[0] + a2 * x[1]; };
  ch.gradient = [a1, a2](double, const Vec&) { return Vec(Eigen::Vector2d(a1, a2)); };
  ch.time_partial = [](double, const Vec&) { return 0.0; };
  ch.hessian = [](double, const Vec&) { return Mat(Mat::Zero(2, 2)); };
  return ch;
}

// a*x1^2 + b*x2, static.
OutputChannel quad2(std::string name, double a, double b) {
  OutputChannel ch;
  ch.name = std::move(name);
  ch.value = [a, b](double, const Vec& x) { return a * x[0] * x[0] + b * x[1]; };
  ch.gradient = [a, b](double, const Vec& x) { return Vec(Eigen::Vector2d(2 * a * x[0], b)); };
  ch.time_partial = [](double, const Vec&) { return 0.0; };
  ch.hessian = [a](double, const Vec&) {
    Mat H = Mat::Zero(2, 2);
    H(0, 0) = 2 * a;
    return H;
  };
  return ch;
}

ConstraintSet mixed_static() {
  std::vector<ConstraintSpec> specs;
  specs.push_back({coordinate("h1", 2, 0),
                   FunnelBound{TimeFunction::constant(-2), TimeFunction::constant(2)}});
  specs.push_back({affine2("h2", -1, 1), LowerBound{TimeFunction::constant(-2)}});
  specs.push_back({quad2("h3", 0.3, 1), UpperBound{TimeFunction::constant(4)}});
  return ConstraintSet(2, std::move(specs));
}

ConstraintSet two_funnel() {
  std::vector<ConstraintSpec> specs;
  specs.push_back({coordinate("h1", 2, 0),
                   FunnelBound{TimeFunction::constant(-3), TimeFunction::constant(2)}});
  specs.push_back({quad2("h2", 0.3, -1),
                   FunnelBound{TimeFunction::constant(-2), TimeFunction::constant(2)}});
  return ConstraintSet(2, std::move(specs));
}

constexpr double kPi = 3.14159265358979323846;

ConstraintSet two_funnel_moving() {
  // Second output chases a drifting vertex whose curvature slowly flips sign.
  const auto c1 = [](double t) { return 0.3 * std::cos(0.1 * kPi * t); };
  const auto c1d = [](double t) { return -0.03 * kPi * std::sin(0.1 * kPi * t); };
  const auto o1 = [](double t) { return 0.02 * t * t + 1.1 * t; };
  const auto o1d = [](double t) { return 0.04 * t + 1.1; };
  OutputChannel h2;
  h2.name = "h2";
  h2.value = [=](double t, const Vec& x) {
    const double u = x[0] - o1(t);
    return c1(t) * u * u - x[1];
  };
  h2.gradient = [=](double t, const Vec& x) {
    return Vec(Eigen::Vector2d(2 * c1(t) * (x[0] - o1(t)), -1));
  };
  h2.time_partial = [=](double t, const Vec& x) {
    const double u = x[0] - o1(t);
    return c1d(t) * u * u - 2 * c1(t) * u * o1d(t);
  };
  h2.hessian = [=](double t, const Vec&) {
    Mat H = Mat::Zero(2, 2);
    H(0, 0) = 2 * c1(t);
    return H;
  };
  std::vector<ConstraintSpec> specs;
  specs.push_back({coordinate("h1", 2, 0),
                   FunnelBound{{[](double t) { return -3 + 1.4 * t; }, [](double) { return 1.4; }},
                               {[](double t) { return 2 + 1.4 * t; }, [](double) { return 1.4; }}}});
  specs.push_back({std::move(h2),
                   FunnelBound{TimeFunction::constant(-2), TimeFunction::constant(2)}});
  return ConstraintSet(2, std::move(specs));
}

ConstraintSet annulus() {
  OutputChannel h;
  h.name = "r2";
  h.value = [](double, const Vec& x) { return x.squaredNorm(); };
  h.gradient = [](double, const Vec& x) { return Vec(2 * x); };
  h.time_partial = [](double, const Vec&) { return 0.0; };
  h.hessian = [](double, const Vec&) { return Mat(2 * Mat::Identity(2, 2)); };
  std::vector<ConstraintSpec> specs;
  specs.push_back({std::move(h),
                   FunnelBound{TimeFunction::constant(9), TimeFunction::constant(16)}});
  return ConstraintSet(2, std::move(specs));
}

ConstraintSet box() {
  std::vector<ConstraintSpec> specs;
  specs.push_back({coordinate("h1", 2, 0),
                   FunnelBound{TimeFunction::constant(-2), TimeFunction::constant(2)}});
  specs.push_back({coordinate("h2", 2, 1),
                   FunnelBound{TimeFunction::constant(-2), TimeFunction::constant(2)}});
  return ConstraintSet(2, std::move(specs));
}

ConstraintSet tracking_band() {
  // Shrinking box riding a circular reference: half-width 1.45 e^{-0.35 t} + 0.3.
  const auto rho = [](double t) { return 1.45 * std::exp(-0.35 * t) + 0.3; };
  const auto rhod = [](double t) { return -0.35 * 1.45 * std::exp(-0.35 * t); };
  const auto xd = [](int i, double t) {
    return i == 0 ? 4.2 * std::cos(0.47 * t) : 4.2 * std::sin(0.47 * t);
  };
  const auto xdd = [](int i, double t) {
    return i == 0 ? -4.2 * 0.47 * std::sin(0.47 * t) : 4.2 * 0.47 * std::cos(0.47 * t);
  };
  std::vector<ConstraintSpec> specs;
  for (int i = 0; i < 2; ++i) {
    specs.push_back(
        {coordinate(i == 0 ? "h1" : "h2", 2, i),
         FunnelBound{{[=](double t) { return xd(i, t) - rho(t); },
                      [=](double t) { return xdd(i, t) - rhod(t); }},
                     {[=](double t) { return xd(i, t) + rho(t); },
                      [=](double t) { return xdd(i, t) + rhod(t); }}}});
  }
  return ConstraintSet(2, std::move(specs));
}

ConstraintSet coupled_intermittent() {
  // Three outputs coupled through a shared drifting center; the funnel's width
  // collapses periodically, so the feasible region vanishes in windows.
  const auto o1 = [](double t) { return 5 * std::cos(0.28 * t); };
  const auto o1d = [](double t) { return -1.4 * std::sin(0.28 * t); };
  const auto o2 = [](double t) { return 5 * std::sin(0.28 * t); };
  const auto o2d = [](double t) { return 1.4 * std::cos(0.28 * t); };
  const auto c1 = [](double t) { return -2 + 2 * std::cos(t); };
  const auto c1d = [](double t) { return -2 * std::sin(t); };
  const auto c2 = [](double t) { return 1 + 0.5 * std::sin(0.7 * t); };
  const auto c2d = [](double t) { return 0.35 * std::cos(0.7 * t); };
  const auto c3 = [](double t) { return std::sin(0.4 * t); };
  const auto c3d = [](double t) { return 0.4 * std::cos(0.4 * t); };
  const auto c4 = [](double t) { return 1 - std::cos(0.5 * t); };
  const auto c4d = [](double t) { return 0.5 * std::sin(0.5 * t); };

  OutputChannel h1;
  h1.name = "h1";
  h1.value = [=](double t, const Vec& x) { return x[0] - o1(t); };
  h1.gradient = [](double, const Vec&) { return Vec(Eigen::Vector2d(1, 0)); };
  h1.time_partial = [=](double t, const Vec&) { return -o1d(t); };
  h1.hessian = [](double, const Vec&) { return Mat(Mat::Zero(2, 2)); };

  OutputChannel h2;
  h2.name = "h2";
  h2.value = [=](double t, const Vec& x) {
    const double u = x[0] - o1(t), v = x[1] - o2(t);
    return c1(t) * u * u + c2(t) * v + c3(t) * u;
  };
  h2.gradient = [=](double t, const Vec& x) {
    const double u = x[0] - o1(t);
    return Vec(Eigen::Vector2d(2 * c1(t) * u + c3(t), c2(t)));
  };
  h2.time_partial = [=](double t, const Vec& x) {
    const double u = x[0] - o1(t), v = x[1] - o2(t);
    return c1d(t) * u * u - 2 * c1(t) * u * o1d(t) + c2d(t) * v - c2(t) * o2d(t) +
           c3d(t) * u - c3(t) * o1d(t);
  };
  h2.hessian = [=](double t, const Vec&) {
    Mat H = Mat::Zero(2, 2);
    H(0, 0) = 2 * c1(t);
    return H;
  };

  OutputChannel h3;
  h3.name = "h3";
  h3.value = [=](double t, const Vec& x) {
    const double u = x[0] - o1(t);
    return c4(t) * u * u + (x[1] - o2(t));
  };
  h3.gradient = [=](double t, const Vec& x) {
    return Vec(Eigen::Vector2d(2 * c4(t) * (x[0] - o1(t)), 1));
  };
  h3.time_partial = [=](double t, const Vec& x) {
    const double u = x[0] - o1(t);
    return c4d(t) * u * u - 2 * c4(t) * u * o1d(t) - o2d(t);
  };
  h3.hessian = [=](double t, const Vec&) {
    Mat H = Mat::Zero(2, 2);
    H(0, 0) = 2 * c4(t);
    return H;
  };

  std::vector<ConstraintSpec> specs;
  specs.push_back({std::move(h1),
                   FunnelBound{{[](double t) { return -0.7 - std::sin(0.4 * t); },
                                [](double t) { return -0.4 * std::cos(0.4 * t); }},
                               {[](double t) { return 1.1 + 3 * std::sin(0.45 * t); },
                                [](double t) { return 1.35 * std::cos(0.45 * t); }}}});
  specs.push_back({std::move(h2),
                   LowerBound{{[](double t) { return -1 - 0.5 * std::cos(0.3 * t); },
                               [](double t) { return 0.15 * std::sin(0.3 * t); }}}});
  specs.push_back({std::move(h3),
                   UpperBound{{[](double t) { return 0.5 + std::sin(0.4 * t); },
                               [](double t) { return 0.4 * std::cos(0.4 * t); }}}});
  return ConstraintSet(2, std::move(specs));
}

GridSpec roi_box(double x_lo, double x_hi, double y_lo, double y_hi, int res = 201) {
  GridSpec g;
  g.box = {{x_lo, x_hi}, {y_lo, y_hi}};
  g.resolution = res;
  return g;
}

}  // namespace

std::vector<std::string> catalog_set_names() {
  return {"mixed_static", "two_funnel", "two_funnel_moving",
          "annulus",      "box",        "tracking_band",
          "coupled_intermittent"};
}

bool catalog_has_set(const std::string& name) {
  for (const auto& s : catalog_set_names())
    if (s == name) return true;
  return false;
}

ConstraintSet catalog_set(const std::string& name) {
  if (name == "mixed_static") return mixed_static();
  if (name == "two_funnel") return two_funnel();
  if (name == "two_funnel_moving") return two_funnel_moving();
  if (name == "annulus") return annulus();
  if (name == "box") return box();
  if (name == "tracking_band") return tracking_band();
  if (name == "coupled_intermittent") return coupled_intermittent();
  throw ContractViolation("unknown catalog set: " + name);
}

GridSpec catalog_roi(const std::string& name) {
  if (name == "mixed_static") return roi_box(-4, 4, -5, 5);
  if (name == "two_funnel") return roi_box(-4, 3, -3, 6);
  if (name == "two_funnel_moving") return roi_box(-4, 17, -6, 6);
  if (name == "annulus") return roi_box(-5, 5, -5, 5);
  if (name == "box") return roi_box(-3, 3, -3, 3);
  if (name == "tracking_band") return roi_box(-6.5, 6.5, -6.5, 6.5);
  if (name == "coupled_intermittent") return roi_box(-10, 10, -10, 10);
  throw ContractViolation("unknown catalog set: " + name);
}

}  // namespace cfc
