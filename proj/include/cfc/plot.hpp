#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cfc/constraint.hpp"
#include "cfc/sim.hpp"

namespace cfc {

// Margin-vs-time overlay: alpha, its bound, and, when the columns exist, the
// nominal bound and the estimate. oracle supplies optional (t, alpha_star)
// points from a separate oracle run.
std::string alpha_timeline_svg(const SimulationTrace& trace,
                               const std::vector<std::pair<double, double>>& oracle = {});

// One panel per snapshot time: the x1 path so far plus the zero contour of
// alpha (marching squares over roi). Planar constraint sets only.
std::string xy_snapshots_svg(const SimulationTrace& trace, const Consolidation& cons,
                             const GridSpec& roi, const std::vector<double>& times);

}  // namespace cfc
