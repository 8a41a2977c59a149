#pragma once

#include <string>
#include <vector>

#include "cfc/oracle.hpp"
#include "cfc/sim.hpp"

namespace cfc {

// Parse result plus anything worth flagging that is not fatal for the chosen
// bound policy (a funnel that collapses mid-horizon is an error under a static
// bound but expected input for the adaptive one).
struct ScenarioLoad {
  Scenario scenario;
  std::vector<std::string> warnings;
};

ScenarioLoad parse_scenario(const std::string& path);
ScenarioLoad parse_scenario_text(const std::string& text, const std::string& display_name);

// Canonical re-serialization of the parsed document; parsing the result again
// reproduces the same document.
std::string emit_scenario(const Scenario& s);

// 17 significant digits, round-trip exact.
std::string format_double(double v);

std::string trace_csv(const SimulationTrace& trace);
SimulationTrace read_trace_csv(const std::string& path);

// Writes trace.csv, meta.json and events.log under dir (created if missing).
void emit_trace(const SimulationTrace& trace, const std::string& dir);

struct OracleSample {
  double t = 0.0;
  OracleResult res;
};

std::string oracle_csv(const std::vector<OracleSample>& samples);
void write_oracle_csv(const std::vector<OracleSample>& samples, const std::string& path);
// Returns (t, alpha_star) pairs; the remaining columns are diagnostics.
std::vector<std::pair<double, double>> read_oracle_csv(const std::string& path);

}  // namespace cfc
