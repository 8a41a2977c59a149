#pragma once

#include <functional>
#include <vector>

#include "cfc/types.hpp"

namespace cfc {

// Block strict-feedback chain: xdot_i = f_i(t, xbar_i) + G_i(t, xbar_i) * x_{i+1},
// with u in place of x_{r+1}. xbar_i stacks blocks 1..i.
struct PlantModel {
  int n = 1;
  int r = 1;
  std::vector<std::function<Vec(double, const Vec&)>> f;  // size r
  std::vector<std::function<Mat(double, const Vec&)>> G;  // size r
};

Vec plant_rhs(const PlantModel& m, double t, const Vec& x, const Vec& u);

// Pure chain: f = 0, G = I at every level.
PlantModel integrator_chain(int n, int r);

// Planar wheeled body steered through a hand point held L ahead of the wheel
// axis. x1 is the hand position, x2 its velocity, theta the heading; theta is
// carried as a fifth state alongside the two blocks.
struct RobotParams {
  double m_R = 3.6;
  double I_R = 0.0405;
  double D1 = 0.3;
  double D2 = 0.04;
  double L = 0.2;
  std::function<Eigen::Vector2d(double)> disturbance;  // body-frame force/torque, may be null
};

Eigen::Vector2d default_disturbance(double t);

// Maps hand velocity to body twist (v, omega).
Eigen::Matrix2d hand_frame(double theta, double L);

// The chain form of the hand dynamics at frozen heading theta. robot_rhs is
// built on this, so the two agree bitwise on the shared blocks.
PlantModel robot_as_chain(const RobotParams& p, double theta);

// state = [x1(2); x2(2); theta], u = hand-frame force.
Vec robot_rhs(const RobotParams& p, double t, const Vec& state, const Vec& u);

}  // namespace cfc
