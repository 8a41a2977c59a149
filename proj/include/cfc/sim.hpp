#pragma once

#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "cfc/bounds.hpp"
#include "cfc/controller.hpp"
#include "cfc/plant.hpp"

namespace cfc {

struct IntegrationSettings {
  double step = 1e-3;
  double horizon = 25.0;
  int record_stride = 1;  // every k-th step lands in the trace
};

// Axis-aligned evaluation grid for the margin oracle.
struct GridSpec {
  std::vector<std::pair<double, double>> box;  // per-dimension [lo, hi]
  int resolution = 201;                        // points per dimension, >= 2
  int polish_steps = 50;
  double polish_rate = 0.0;  // <= 0 picks 0.1/nu
};

using PlantSpec = std::variant<PlantModel, RobotParams>;

// Everything that determines one closed-loop run. Channel/bound sources are
// kept as a normalized key/value document so a scenario can be re-serialized
// canonically.
struct Scenario {
  std::string name;
  PlantSpec plant = integrator_chain(1, 1);
  ConstraintSet constraints;
  double nu = 1.0;
  BoundPolicy bound = StaticBound{};
  ControllerConfig controller;
  IntegrationSettings integration;
  Vec x0;               // stacked blocks, n*r entries
  double theta0 = 0.0;  // robot heading start; ignored for chain plants
  GridSpec roi;         // region the oracle searches
  std::vector<std::tuple<std::string, std::string, std::string>> doc;  // (section, key, value)
};

struct TraceEvent {
  double t = 0.0;
  std::string kind;
  std::string detail;
};

// Values resolved or discovered while running; serialized into meta.json.
struct RunMeta {
  std::string scenario_name;
  double step = 0.0;
  double horizon = 0.0;
  int record_stride = 1;
  bool adaptive = false;
  double rho0_resolved = 0.0;  // start value of the active bound (nominal one if adaptive)
  std::vector<double> theta0_resolved;  // funnel widths at t=0, levels 2..r flattened
  std::vector<std::string> fd_channels;
  bool aborted = false;
  double abort_time = 0.0;
  std::string abort_reason;
};

struct SimulationTrace {
  int n = 0;
  int r = 0;
  bool has_estimator = false;
  bool has_theta = false;
  std::vector<double> t;
  std::vector<Vec> x;       // n*r stacked
  std::vector<double> theta;
  std::vector<Vec> u;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;
  std::vector<double> rho_alpha;
  std::vector<double> varrho;     // nominal bound (adaptive runs)
  std::vector<double> alpha_hat;  // estimator output (adaptive runs)
  std::vector<Vec> x_tilde;
  std::vector<double> e_alpha;
  std::vector<double> eps_alpha;
  std::vector<Vec> e_hat;  // levels 2..r flattened, n*(r-1)
  std::vector<std::string> event;  // usually empty; set on abort rows
  std::vector<TraceEvent> events;
  RunMeta meta;
};

// One classical fourth-order step of ydot = f(t, y).
template <class F>
Vec rk4_step(F&& f, double t, const Vec& y, double h) {
  const Vec k1 = f(t, y);
  const Vec k2 = f(t + 0.5 * h, Vec(y + 0.5 * h * k1));
  const Vec k3 = f(t + 0.5 * h, Vec(y + 0.5 * h * k2));
  const Vec k4 = f(t + h, Vec(y + h * k3));
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Integrates the closed loop at a fixed step. Guards the two barrier
// singularities every step and truncates the run with a recorded abort event
// instead of clamping.
SimulationTrace run_closed_loop(const Scenario& s);

// One (key, value) assignment applied on top of a base scenario.
using PatchAssignment = std::pair<std::string, double>;
using Patch = std::vector<PatchAssignment>;

Scenario apply_patch(const Scenario& base, const Patch& patch);

// Runs base once per patch; results are ordered like the input patches.
std::vector<SimulationTrace> sweep(const Scenario& base, const std::vector<Patch>& patches);

}  // namespace cfc
