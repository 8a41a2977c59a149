#pragma once

#include <string>
#include <vector>

#include "cfc/sim.hpp"

namespace cfc {

// Builtin constraint sets with hand-written derivatives. Scenario files can
// reference them by name; unit tests cross-check the text-defined twins
// against these.
std::vector<std::string> catalog_set_names();
bool catalog_has_set(const std::string& name);
ConstraintSet catalog_set(const std::string& name);
GridSpec catalog_roi(const std::string& name);

}  // namespace cfc
