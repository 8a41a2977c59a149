#include "cfc/plant.hpp"

#include <cmath>

#include "cfc/errors.hpp"

namespace cfc {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct HandMatrices {
  Eigen::Matrix2d M;  // symmetric positive definite for every theta
  Eigen::Matrix2d C;
  Eigen::Matrix2d D;
  Eigen::Matrix2d U;
};

// d(hand_frame)/d(theta); used to assemble the Coriolis term.
Eigen::Matrix2d hand_frame_dtheta(double theta, double L) {
  Eigen::Matrix2d dU;
  dU << -std::sin(theta), std::cos(theta), -std::cos(theta) / L, -std::sin(theta) / L;
  return dU;
}

HandMatrices hand_matrices(const RobotParams& p, double theta, const Eigen::Vector2d& x2) {
  HandMatrices hm;
  hm.U = hand_frame(theta, p.L);
  const double theta_dot = (hm.U * x2)(1);
  const Eigen::Matrix2d dU = theta_dot * hand_frame_dtheta(theta, p.L);
  const Eigen::Vector2d mbar(p.m_R, p.I_R);
  const Eigen::Vector2d dbar(p.D1, p.D2);
  hm.M = hm.U.transpose() * mbar.asDiagonal() * hm.U;
  hm.C = hm.U.transpose() * mbar.asDiagonal() * dU;
  hm.D = hm.U.transpose() * dbar.asDiagonal() * hm.U;
  return hm;
}

}  // namespace

Vec plant_rhs(const PlantModel& m, double t, const Vec& x, const Vec& u) {
  if (m.n < 1 || m.r < 1) throw ContractViolation("plant: n and r must be positive");
  if (static_cast<int>(m.f.size()) != m.r || static_cast<int>(m.G.size()) != m.r)
    throw ContractViolation("plant: need f and G for every level");
  if (x.size() != static_cast<Eigen::Index>(m.n) * m.r)
    throw ContractViolation("plant_rhs: state must have n*r entries");
  if (u.size() != m.n) throw ContractViolation("plant_rhs: input must have n entries");
  Vec xdot(x.size());
  for (int i = 0; i < m.r; ++i) {
    const Vec xbar = x.head(static_cast<Eigen::Index>(i + 1) * m.n);
    const Vec next = (i + 1 < m.r) ? Vec(x.segment(static_cast<Eigen::Index>(i + 1) * m.n, m.n))
                                   : u;
    xdot.segment(static_cast<Eigen::Index>(i) * m.n, m.n) =
        m.f[i](t, xbar) + m.G[i](t, xbar) * next;
  }
  return xdot;
}

PlantModel integrator_chain(int n, int r) {
  if (n < 1 || r < 1) throw ContractViolation("integrator_chain: n and r must be positive");
  PlantModel m;
  m.n = n;
  m.r = r;
  for (int i = 0; i < r; ++i) {
    m.f.emplace_back([n](double, const Vec&) { return Vec::Zero(n); });
    m.G.emplace_back([n](double, const Vec&) { return Mat::Identity(n, n); });
  }
  return m;
}

Eigen::Vector2d default_disturbance(double t) {
  return {0.75 * std::sin(3.0 * t + kPi / 3.0) + 1.5 * std::cos(t + 3.0 * kPi / 7.0),
          -2.4 * std::exp(std::cos(t + kPi / 3.0) + 1.0) * std::sin(t)};
}

Eigen::Matrix2d hand_frame(double theta, double L) {
  Eigen::Matrix2d U;
  U << std::cos(theta), std::sin(theta), -std::sin(theta) / L, std::cos(theta) / L;
  return U;
}

PlantModel robot_as_chain(const RobotParams& p, double theta) {
  if (!(p.L > 0.0)) throw ContractViolation("robot: hand offset L must be positive");
  if (!(p.m_R > 0.0 && p.I_R > 0.0)) throw ContractViolation("robot: mass and inertia must be positive");
  PlantModel m;
  m.n = 2;
  m.r = 2;
  m.f.emplace_back([](double, const Vec&) { return Vec::Zero(2); });
  m.G.emplace_back([](double, const Vec&) { return Mat::Identity(2, 2); });
  m.f.emplace_back([p, theta](double t, const Vec& xbar) {
    const Eigen::Vector2d x2 = xbar.segment<2>(2);
    const HandMatrices hm = hand_matrices(p, theta, x2);
    Eigen::Vector2d rhs = -(hm.C * x2) - hm.D * x2;
    if (p.disturbance) rhs += hm.U.transpose() * p.disturbance(t);
    return Vec(hm.M.llt().solve(rhs));
  });
  m.G.emplace_back([p, theta](double, const Vec& xbar) {
    const Eigen::Vector2d x2 = xbar.segment<2>(2);
    return Mat(hand_matrices(p, theta, x2).M.llt().solve(Eigen::Matrix2d::Identity()));
  });
  return m;
}

Vec robot_rhs(const RobotParams& p, double t, const Vec& state, const Vec& u) {
  if (state.size() != 5) throw ContractViolation("robot_rhs: state is [x1(2); x2(2); theta]");
  if (u.size() != 2) throw ContractViolation("robot_rhs: input has 2 entries");
  const double theta = state[4];
  const PlantModel chain = robot_as_chain(p, theta);
  Vec out(5);
  out.head(4) = plant_rhs(chain, t, state.head(4), u);
  // Heading kinematics: the second body-twist component of the hand velocity.
  out[4] = (hand_frame(theta, p.L) * state.segment<2>(2))(1);
  return out;
}

}  // namespace cfc
