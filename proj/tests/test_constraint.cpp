#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cfc/catalog.hpp"
#include "cfc/constraint.hpp"

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

ConstraintSet funnel1d(double lo, double hi) {
  ConstraintSpec spec{coord1(), FunnelBound{TimeFunction::constant(lo), TimeFunction::constant(hi)}};
  return ConstraintSet(1, {spec});
}

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) { return Vec(Eigen::Vector2d(a, b)); }

}  // namespace

TEST_CASE("psi stacks funnel pairs first, then lower-only, then upper-only") {
  const ConstraintSet set = catalog_set("mixed_static");
  CHECK(set.n() == 2);
  CHECK(set.channels() == 3);
  CHECK(set.funnels() == 1);
  CHECK(set.lower_only() == 1);
  CHECK(set.psi_size() == 4);

  // h1 = x1 in [-2,2]; h2 = -x1 + x2 >= -2; h3 = 0.3 x1^2 + x2 <= 4.
  const Vec psi = eval_psi(set, 0.0, v2(0.5, 1.0));
  CHECK(psi.size() == 4);
  CHECK(psi[0] == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(psi[1] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(psi[2] == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(psi[3] == doctest::Approx(2.925).epsilon(1e-15));
}

TEST_CASE("construction rejects out-of-order stages and bad dimensions") {
  ConstraintSpec funnel{coord1(), FunnelBound{TimeFunction::constant(-1), TimeFunction::constant(1)}};
  ConstraintSpec lower{coord1(), LowerBound{TimeFunction::constant(0)}};
  ConstraintSpec upper{coord1(), UpperBound{TimeFunction::constant(3)}};

  CHECK_NOTHROW(ConstraintSet(1, {funnel, lower, upper}));
  CHECK_THROWS_AS(ConstraintSet(1, {lower, funnel}), ContractViolation);
  CHECK_THROWS_AS(ConstraintSet(1, {upper, lower}), ContractViolation);
  CHECK_THROWS_AS(ConstraintSet(0, {funnel}), ContractViolation);
}

TEST_CASE("consolidation requires a positive sharpness") {
  CHECK_THROWS_AS(Consolidation(funnel1d(-1, 1), 0.0), ContractViolation);
  CHECK_THROWS_AS(Consolidation(funnel1d(-1, 1), -2.0), ContractViolation);
}

TEST_CASE("softmin frozen values") {
  // Equal pair psi = (1,1) at nu = 2.
  const Consolidation pair(funnel1d(-1, 1), 2.0);
  CHECK(alpha(pair, 0.0, v1(0.0)) == doctest::Approx(0.65342640972002735).epsilon(1e-15));

  // Symmetric half-width-2 funnel at nu = 10.
  const Consolidation center(funnel1d(-2, 2), 10.0);
  CHECK(alpha(center, 0.0, v1(0.0)) == doctest::Approx(1.9306852819440055).epsilon(1e-15));
  CHECK(alpha_bar(center.set, 0.0, v1(0.0)) == doctest::Approx(2.0).epsilon(1e-15));

  // psi = (0.03, 0.03, 5, 7): alpha dips negative while alpha_bar stays positive.
  ConstraintSpec tight{coord1(),
                       FunnelBound{TimeFunction::constant(-0.03), TimeFunction::constant(0.03)}};
  ConstraintSpec wide{coord1(),
                      FunnelBound{TimeFunction::constant(-5), TimeFunction::constant(7)}};
  const Consolidation corner(ConstraintSet(1, {tight, wide}), 10.0);
  CHECK(alpha(corner, 0.0, v1(0.0)) ==
        doctest::Approx(-0.039314718055994531).epsilon(1e-14));
  CHECK(alpha_bar(corner.set, 0.0, v1(0.0)) == doctest::Approx(0.03).epsilon(1e-15));
}

TEST_CASE("membership covers all three regimes") {
  const Consolidation wide(funnel1d(-2, 2), 10.0);
  CHECK(membership(wide, 0.0, v1(0.0)) == Membership::inside_smooth);
  CHECK(membership(wide, 0.0, v1(5.0)) == Membership::outside);

  ConstraintSpec tight{coord1(),
                       FunnelBound{TimeFunction::constant(-0.03), TimeFunction::constant(0.03)}};
  ConstraintSpec wide2{coord1(),
                       FunnelBound{TimeFunction::constant(-5), TimeFunction::constant(7)}};
  const Consolidation corner(ConstraintSet(1, {tight, wide2}), 10.0);
  CHECK(membership(corner, 0.0, v1(0.0)) == Membership::inside_exact_only);
}

TEST_CASE("sandwich inequality on every catalog set") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ud(-6.0, 6.0);
  std::uniform_real_distribution<double> ut(0.0, 10.0);
  for (const std::string& name : catalog_set_names()) {
    const ConstraintSet set = catalog_set(name);
    for (double nu : {2.0, 10.0}) {
      const Consolidation c(set, nu);
      const double margin = std::log(static_cast<double>(set.psi_size())) / nu;
      for (int k = 0; k < 200; ++k) {
        const double t = ut(rng);
        Vec x(set.n());
        for (int i = 0; i < set.n(); ++i) x[i] = ud(rng);
        const double a = alpha(c, t, x);
        const double ab = alpha_bar(set, t, x);
        CHECK(a <= ab + 1e-12);
        CHECK(ab <= a + margin + 1e-12);
      }
    }
  }
}

TEST_CASE("alpha is invariant under permutation within a stage") {
  const ConstraintSet base = catalog_set("two_funnel");
  std::vector<ConstraintSpec> swapped = base.specs();
  std::swap(swapped[0], swapped[1]);
  const Consolidation a1(base, 10.0);
  const Consolidation a2(ConstraintSet(2, std::move(swapped)), 10.0);
  const Vec x = v2(-0.7, 1.2);
  CHECK(alpha(a1, 0.0, x) == doctest::Approx(alpha(a2, 0.0, x)).epsilon(1e-14));
  CHECK(grad_alpha(a1, 0.0, x)[0] ==
        doctest::Approx(grad_alpha(a2, 0.0, x)[0]).epsilon(1e-13));
  CHECK(grad_alpha(a1, 0.0, x)[1] ==
        doctest::Approx(grad_alpha(a2, 0.0, x)[1]).epsilon(1e-13));
}

TEST_CASE("max-shift evaluation survives margins far outside double exp range") {
  const Consolidation c(funnel1d(-2, 2), 10.0);
  const double far = alpha(c, 0.0, v1(250.0));  // psi = (252, -248)
  CHECK(std::isfinite(far));
  CHECK(far == doctest::Approx(-248.0).epsilon(1e-12));
}

TEST_CASE("frozen kernel values on the static mixed set") {
  const Consolidation c(catalog_set("mixed_static"), 10.0);
  const Vec x = v2(0.5, 1.0);
  CHECK(alpha(c, 0.0, x) == doctest::Approx(1.4999908556726321).epsilon(1e-14));
  const Vec g = grad_alpha(c, 0.0, x);
  CHECK(g[0] == doctest::Approx(-0.99990875516793037).epsilon(1e-13));
  CHECK(g[1] == doctest::Approx(4.4748242432026019e-5).epsilon(1e-10));
  const Mat H = hessian_alpha(c, 0.0, x);
  CHECK(H(0, 0) == doctest::Approx(-0.0018193093291812031).epsilon(1e-11));
  CHECK(H(0, 1) == doctest::Approx(4.5735824731160573e-6).epsilon(1e-9));
  CHECK(H(1, 0) == H(0, 1));
  CHECK(H(1, 1) == doctest::Approx(-0.0004604131203095522).epsilon(1e-11));
  CHECK(dalpha_dt(c, 0.0, x) == 0.0);
}

TEST_CASE("frozen kernel values on the double funnel set") {
  const Consolidation c(catalog_set("two_funnel"), 10.0);
  const Vec x = v2(-1.0, 0.8);
  CHECK(alpha(c, 0.0, x) == doctest::Approx(1.4993239252611665).epsilon(1e-14));
  const Vec g = grad_alpha(c, 0.0, x);
  CHECK(g[0] == doctest::Approx(-0.58923793337043733).epsilon(1e-13));
  CHECK(g[1] == doctest::Approx(-0.99321696102064529).epsilon(1e-13));
  const Mat H = hessian_alpha(c, 0.0, x);
  CHECK(H(0, 0) == doctest::Approx(0.4251093519236035).epsilon(1e-12));
  CHECK(H(0, 1) == doctest::Approx(-0.1074317994515785).epsilon(1e-12));
  CHECK(H(1, 1) == doctest::Approx(-0.068272174166291251).epsilon(1e-12));
}

TEST_CASE("frozen kernel values on the drifting double funnel set") {
  const Consolidation c(catalog_set("two_funnel_moving"), 10.0);
  const Vec x = v2(4.0, 1.0);
  CHECK(alpha(c, 2.0, x) == doctest::Approx(0.79998965778538407).epsilon(1e-14));
  const Vec g = grad_alpha(c, 2.0, x);
  CHECK(g[0] == doctest::Approx(-0.99981085153313415).epsilon(1e-13));
  CHECK(g[1] == doctest::Approx(-0.00010268427345208115).epsilon(1e-10));
  CHECK(dalpha_dt(c, 2.0, x) == doctest::Approx(1.3997372244106629).epsilon(1e-13));
}

TEST_CASE("moving scalar funnel: value, gradient, drift") {
  ConstraintSpec spec{coord1(),
                      FunnelBound{{[](double t) { return std::sin(t) - 1.0; },
                                   [](double t) { return std::cos(t); }},
                                  {[](double t) { return std::sin(t) + 1.0; },
                                   [](double t) { return std::cos(t); }}}};
  const Consolidation c(ConstraintSet(1, {spec}), 5.0);
  CHECK(alpha(c, 0.7, v1(0.3)) == doctest::Approx(0.64948355599649453).epsilon(1e-14));
  CHECK(grad_alpha(c, 0.7, v1(0.3))[0] ==
        doctest::Approx(0.93799395977174791).epsilon(1e-14));
  CHECK(dalpha_dt(c, 0.7, v1(0.3)) ==
        doctest::Approx(-0.71741735185146212).epsilon(1e-14));
}

TEST_CASE("empty set refuses to consolidate") {
  Consolidation c;
  c.nu = 10.0;
  CHECK(c.set.channels() == 0);
  CHECK_THROWS_AS(alpha(c, 0.0, v1(0.0)), ContractViolation);
  CHECK_THROWS_AS(alpha_bar(c.set, 0.0, v1(0.0)), ContractViolation);
}

TEST_CASE("fd_channel flags itself and approximates the analytic derivatives") {
  OutputChannel ch = fd_channel("q", [](double t, const Vec& x) {
    return 0.5 * x[0] * x[0] + std::sin(t) * x[1];
  });
  CHECK(ch.fd_derivatives);
  const Vec x = v2(1.2, -0.4);
  const Vec g = ch.gradient(0.3, x);
  CHECK(g[0] == doctest::Approx(1.2).epsilon(1e-7));
  CHECK(g[1] == doctest::Approx(std::sin(0.3)).epsilon(1e-7));
  CHECK(ch.time_partial(0.3, x) == doctest::Approx(-0.4 * std::cos(0.3)).epsilon(1e-6));
  CHECK(ch.hessian(0.3, x)(0, 0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(ch.hessian(0.3, x)(0, 1) == doctest::Approx(0.0).epsilon(1e-4));
}

TEST_CASE("hessian of the consolidated margin is symmetric everywhere sampled") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ud(-4.0, 4.0);
  const Consolidation c(catalog_set("coupled_intermittent"), 10.0);
  for (int k = 0; k < 50; ++k) {
    const Vec x = v2(ud(rng), ud(rng));
    const Mat H = hessian_alpha(c, 0.4 * k, x);
    CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}
