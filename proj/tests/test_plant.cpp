#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cfc/plant.hpp"

#include <Eigen/Eigenvalues>

#include "cfc/errors.hpp"

using namespace cfc;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec vec(std::initializer_list<double> vals) {
  Vec v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("integrator chain shifts blocks and feeds u into the last one") {
  const PlantModel m = integrator_chain(2, 3);
  const Vec x = vec({1, 2, 3, 4, 5, 6});
  const Vec u = vec({7, 8});
  const Vec xdot = plant_rhs(m, 0.0, x, u);
  const Vec want = vec({3, 4, 5, 6, 7, 8});
  for (int i = 0; i < 6; ++i) CHECK(xdot[i] == want[i]);
}

TEST_CASE("plant interfaces validate their dimensions") {
  CHECK_THROWS_AS(integrator_chain(0, 1), ContractViolation);
  CHECK_THROWS_AS(integrator_chain(1, 0), ContractViolation);

  const PlantModel m = integrator_chain(2, 2);
  CHECK_THROWS_AS(plant_rhs(m, 0.0, vec({1, 2, 3}), vec({0, 0})), ContractViolation);
  CHECK_THROWS_AS(plant_rhs(m, 0.0, vec({1, 2, 3, 4}), vec({0})), ContractViolation);

  PlantModel broken = m;
  broken.f.pop_back();
  CHECK_THROWS_AS(plant_rhs(broken, 0.0, vec({1, 2, 3, 4}), vec({0, 0})), ContractViolation);

  RobotParams p;
  CHECK_THROWS_AS(robot_rhs(p, 0.0, vec({1, 2, 3, 4}), vec({0, 0})), ContractViolation);
  CHECK_THROWS_AS(robot_rhs(p, 0.0, vec({1, 2, 3, 4, 0}), vec({0})), ContractViolation);
  p.L = 0.0;
  CHECK_THROWS_AS(robot_as_chain(p, 0.0), ContractViolation);
  p.L = 0.2;
  p.m_R = 0.0;
  CHECK_THROWS_AS(robot_as_chain(p, 0.0), ContractViolation);
  p.m_R = 3.6;
  p.I_R = -1.0;
  CHECK_THROWS_AS(robot_as_chain(p, 0.0), ContractViolation);
}

TEST_CASE("hand frame at zero heading scales the angular channel by 1/L") {
  const Eigen::Matrix2d U = hand_frame(0.0, 0.2);
  CHECK(U(0, 0) == 1.0);
  CHECK(U(0, 1) == 0.0);
  CHECK(U(1, 0) == 0.0);
  CHECK(U(1, 1) == 5.0);
}

TEST_CASE("hand-frame inertia at zero heading is the frozen diagonal") {
  RobotParams p;
  const PlantModel chain = robot_as_chain(p, 0.0);
  const Vec state = vec({0, 0, 0, 0});
  const Mat Minv = chain.G[1](0.0, state);
  CHECK(Minv(0, 0) == doctest::Approx(1.0 / 3.6).epsilon(1e-14));
  CHECK(Minv(1, 1) == doctest::Approx(1.0 / 1.0125).epsilon(1e-14));
  CHECK(std::abs(Minv(0, 1)) < 1e-15);
  CHECK(std::abs(Minv(1, 0)) < 1e-15);
}

TEST_CASE("the inertia stays symmetric positive definite at every heading") {
  RobotParams p;
  for (double theta = -kPi; theta <= kPi; theta += kPi / 7.0) {
    const PlantModel chain = robot_as_chain(p, theta);
    const Vec state = vec({0, 0, 0.4, -0.3});
    const Mat Minv = chain.G[1](0.0, state);
    CHECK(std::abs(Minv(0, 1) - Minv(1, 0)) < 1e-12);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(Minv);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("the full robot agrees with its chain form on the shared blocks") {
  RobotParams p;
  p.disturbance = default_disturbance;
  const double theta = 0.3;
  const Vec state = vec({0.5, -1.2, 0.8, 0.1, theta});
  const Vec u = vec({0.7, -0.4});
  const double t = 1.7;

  const Vec full = robot_rhs(p, t, state, u);
  const PlantModel chain = robot_as_chain(p, theta);
  const Vec part = plant_rhs(chain, t, state.head(4), u);
  for (int i = 0; i < 4; ++i) CHECK(full[i] == part[i]);

  // Heading kinematics: theta_dot is the angular part of the hand velocity.
  const double omega = (hand_frame(theta, p.L) * state.segment<2>(2))(1);
  CHECK(full[4] == omega);
}

TEST_CASE("straight-ahead coasting decays through the linear damping only") {
  RobotParams p;  // no disturbance
  const Vec state = vec({0, 0, 1, 0, 0});
  const Vec u = vec({0, 0});
  const Vec xdot = robot_rhs(p, 0.0, state, u);
  CHECK(xdot[0] == 1.0);
  CHECK(xdot[1] == 0.0);
  // No rotation means no Coriolis coupling: a pure -D1/m_R deceleration.
  CHECK(xdot[2] == doctest::Approx(-0.3 / 3.6).epsilon(1e-13));
  CHECK(std::abs(xdot[3]) < 1e-14);
  CHECK(xdot[4] == 0.0);
}

TEST_CASE("a body-frame disturbance enters through the hand frame transpose") {
  RobotParams p;
  const Vec state = vec({0, 0, 0, 0, 0});
  const Vec u = vec({0, 0});
  const Vec base = robot_rhs(p, 0.0, state, u);

  RobotParams pd = p;
  pd.disturbance = [](double) { return Eigen::Vector2d(1.0, 2.0); };
  const Vec pushed = robot_rhs(pd, 0.0, state, u);

  // At zero heading: force d1 -> d1/m_R, torque d2 -> (d2/L)/M22. The small
  // hand offset makes the torque channel nearly an order of magnitude louder.
  CHECK(pushed[2] - base[2] == doctest::Approx(1.0 / 3.6).epsilon(1e-12));
  CHECK(pushed[3] - base[3] == doctest::Approx(10.0 / 1.0125).epsilon(1e-12));
  CHECK(pushed[0] == base[0]);
  CHECK(pushed[1] == base[1]);
}

TEST_CASE("the stock disturbance matches its published waveform") {
  for (double t : {0.0, 1.234, 4.0, 9.81}) {
    const Eigen::Vector2d d = default_disturbance(t);
    const double f = 0.75 * std::sin(3.0 * t + kPi / 3.0) + 1.5 * std::cos(t + 3.0 * kPi / 7.0);
    const double tau = -2.4 * std::exp(std::cos(t + kPi / 3.0) + 1.0) * std::sin(t);
    CHECK(d[0] == f);
    CHECK(d[1] == tau);
  }
}
