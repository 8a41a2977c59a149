#pragma once

#include <stdexcept>
#include <string>

namespace cfc {

// A caller broke an interface precondition (sizes, ordering, parameter ranges).
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// The margin error alpha - rho_alpha reached zero or below: the log barrier is
// undefined from here on and the run cannot continue.
struct ConstraintTransformSingularity : std::runtime_error {
  double t;
  double e_alpha;
  ConstraintTransformSingularity(double t_, double e_alpha_)
      : std::runtime_error("barrier transform undefined: alpha - rho_alpha = " +
                           std::to_string(e_alpha_) + " at t = " + std::to_string(t_)),
        t(t_),
        e_alpha(e_alpha_) {}
};

// A normalized intermediate error left (-1, 1): its funnel transform is undefined.
struct IntermediateFunnelSingularity : std::runtime_error {
  int level;      // backstepping level i >= 2
  int component;  // 0-based component j
  double t;
  IntermediateFunnelSingularity(int level_, int component_, double t_)
      : std::runtime_error("intermediate error left its funnel: level " + std::to_string(level_) +
                           ", component " + std::to_string(component_) +
                           ", t = " + std::to_string(t_)),
        level(level_),
        component(component_),
        t(t_) {}
};

// rho_alpha(0) >= alpha(0, x1(0)): the run would start on the wrong side of the bound.
struct InitialBoundViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cfc
