#pragma once

#include <string>
#include <vector>

#include "cfc/constraint.hpp"
#include "cfc/sim.hpp"

namespace cfc {

// Brute-force margin maximum at one time instant: dense grid sweep, then
// gradient-ascent polish from the best cell. alpha_bar_star is the plain grid
// maximum of the exact margin, kept alongside for infeasibility bracketing.
struct OracleResult {
  double alpha_star = 0.0;
  Vec argmax;
  bool on_boundary = false;  // refined argmax within one cell of the box edge
  double alpha_bar_star = 0.0;
};

OracleResult alpha_star_grid(const Consolidation& c, double t, const GridSpec& grid);

struct Window {
  double t_start = 0.0;
  double t_end = 0.0;
};

// Least-violation audit of a finished run. Windows are the maximal spans of
// sampled times where the exact constrained set is empty. When no window
// exists the gap statistics cover the whole trace and are informational only.
struct ViolationReport {
  std::vector<Window> infeasible_windows;
  double max_gap = 0.0;                // max of alpha_star - alpha(t, x1(t))
  double estimation_error_max = 0.0;   // max of alpha_star - alpha_hat(t)
};

ViolationReport violation_report(const SimulationTrace& trace, const Consolidation& c,
                                 const GridSpec& grid, double mu, int max_points = 201);

// Heuristic coercivity probe: -alpha must grow along every escaping ray for
// the constrained set to be bounded. A sampler can refute boundedness, never
// certify it, so the flags read "suspicious", not "unbounded".
struct RayGrowth {
  Vec direction;
  double neg_alpha_first = 0.0;
  double neg_alpha_last = 0.0;
  bool suspicious = false;  // -alpha failed to grow by at least 1 along the ray
};

struct BoundednessReport {
  std::vector<RayGrowth> rays;
  std::vector<double> min_neg_alpha_per_radius;
  bool likely_unbounded = false;
};

BoundednessReport check_boundedness_sampled(const Consolidation& c, double t,
                                            const std::vector<double>& radii, int directions);

// Stationary points of alpha at time t, Newton-polished from grid cells where
// the gradient norm bottoms out. A maximum has a negative semidefinite
// Hessian; anything else on the list breaks the invexity premise.
struct CriticalPoint {
  Vec point;
  double grad_norm = 0.0;
  double eig_min = 0.0;
  double eig_max = 0.0;
  bool is_maximum = false;
};

std::vector<CriticalPoint> critical_point_scan(const Consolidation& c, double t,
                                               const GridSpec& grid, double grad_tol = 1e-6);

struct FdTolerances {
  double grad = 1e-5;
  double time = 1e-5;
  double hess = 1e-4;
};

// Worst relative finite-difference mismatch over random (t, x1) samples, for
// the consolidated kernels and for every channel's own derivatives.
struct FdReport {
  double alpha_grad_rel = 0.0;
  double alpha_time_rel = 0.0;
  double alpha_hess_rel = 0.0;
  double channel_grad_rel = 0.0;
  double channel_time_rel = 0.0;
  double channel_hess_rel = 0.0;
  std::string worst_channel;  // channel behind the largest per-channel error
  int samples = 0;
  bool pass = false;
};

FdReport fd_validate(const Consolidation& c, const GridSpec& box, double t_lo, double t_hi,
                     int sample_count, const FdTolerances& tol = {}, unsigned seed = 20240901);

}  // namespace cfc
