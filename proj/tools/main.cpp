#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfc/errors.hpp"
#include "cfc/oracle.hpp"
#include "cfc/plot.hpp"
#include "cfc/scenario_io.hpp"
#include "cfc/sim.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidationError = 2;
constexpr int kRunAborted = 3;
constexpr int kIoError = 4;

cfc::ScenarioLoad load_scenario(const std::string& path) {
  cfc::ScenarioLoad load = cfc::parse_scenario(path);
  for (const std::string& w : load.warnings) std::cerr << "warning: " << w << "\n";
  return load;
}

// "start:end:step" time sampling for the oracle sweep.
struct TimeGrid {
  double start = 0.0, end = 0.0, step = 0.1;
  bool set = false;
};

TimeGrid parse_time_grid(const std::string& spec) {
  TimeGrid g;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &g.start, &g.end, &g.step) != 3 ||
      !(g.step > 0) || g.end < g.start)
    throw cfc::ScenarioParseError("--grid expects start:end:step with step > 0, got '" + spec +
                                  "'");
  g.set = true;
  return g;
}

cfc::Patch parse_patch(const std::string& spec) {
  cfc::Patch patch;
  size_t pos = 0;
  while (pos <= spec.size()) {
    const size_t comma = std::min(spec.find(',', pos), spec.size());
    const std::string item = spec.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty()) continue;
    const size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw cfc::ScenarioParseError("--patch expects key=value pairs, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    try {
      size_t idx = 0;
      const double value = std::stod(item.substr(eq + 1), &idx);
      if (idx != item.size() - eq - 1) throw std::invalid_argument("");
      patch.emplace_back(key, value);
    } catch (const std::exception&) {
      throw cfc::ScenarioParseError("--patch value for '" + key + "' is not a number");
    }
  }
  if (patch.empty()) throw cfc::ScenarioParseError("--patch is empty");
  return patch;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error(path + ": write failed");
}

int run_simulate(const std::string& scenario_path, const std::string& out_dir) {
  const cfc::ScenarioLoad load = load_scenario(scenario_path);
  const cfc::SimulationTrace trace = cfc::run_closed_loop(load.scenario);
  cfc::emit_trace(trace, out_dir);
  std::cout << "wrote " << out_dir << "/trace.csv (" << trace.t.size() << " rows)\n";
  if (trace.meta.aborted) {
    std::cerr << "run aborted at t = " << trace.meta.abort_time << ": " << trace.meta.abort_reason
              << "\n";
    return kRunAborted;
  }
  return kOk;
}

int run_oracle(const std::string& scenario_path, const TimeGrid& grid_opt, int resolution,
               const std::string& out_csv) {
  const cfc::ScenarioLoad load = load_scenario(scenario_path);
  const cfc::Scenario& s = load.scenario;
  if (s.roi.box.empty())
    throw cfc::ScenarioParseError(scenario_path +
                                  ": scenario has no [oracle] box to search (and no catalog "
                                  "default); add one to use the oracle");
  cfc::GridSpec roi = s.roi;
  if (resolution > 0) roi.resolution = resolution;
  TimeGrid grid = grid_opt;
  if (!grid.set) {
    grid.start = 0.0;
    grid.end = s.integration.horizon;
    grid.step = 0.1;
  }
  const cfc::Consolidation cons(s.constraints, s.nu);
  std::vector<cfc::OracleSample> samples;
  for (double t = grid.start; t <= grid.end + 1e-12; t += grid.step)
    samples.push_back({t, cfc::alpha_star_grid(cons, t, roi)});
  cfc::write_oracle_csv(samples, out_csv);
  int boundary = 0;
  for (const auto& sample : samples) boundary += sample.res.on_boundary ? 1 : 0;
  std::cout << "wrote " << out_csv << " (" << samples.size() << " times)\n";
  if (boundary > 0)
    std::cerr << "warning: argmax landed within one cell of the box edge at " << boundary
              << " of " << samples.size() << " times; the roi may be too small\n";
  return kOk;
}

int run_validate(const std::string& scenario_path, int samples) {
  const cfc::ScenarioLoad load = load_scenario(scenario_path);
  const cfc::Scenario& s = load.scenario;
  if (s.roi.box.empty())
    throw cfc::ScenarioParseError(scenario_path + ": validation needs an [oracle] box");
  const cfc::Consolidation cons(s.constraints, s.nu);

  const cfc::FdReport fd =
      cfc::fd_validate(cons, s.roi, 0.0, s.integration.horizon, samples);
  std::cout << "finite differences over " << fd.samples << " samples:\n"
            << "  alpha   grad " << fd.alpha_grad_rel << "  time " << fd.alpha_time_rel
            << "  hess " << fd.alpha_hess_rel << "\n"
            << "  channel grad " << fd.channel_grad_rel << "  time " << fd.channel_time_rel
            << "  hess " << fd.channel_hess_rel << "\n";
  if (!fd.pass)
    std::cout << "  WORST OFFENDER: " << (fd.worst_channel.empty() ? "(consolidated kernels)"
                                                                   : fd.worst_channel)
              << "\n";

  double r_max = 0.0;
  for (const auto& [lo, hi] : s.roi.box) r_max = std::max(r_max, std::max(-lo, hi));
  const std::vector<double> radii = {r_max, 2 * r_max, 4 * r_max, 8 * r_max};
  const cfc::BoundednessReport bd = cfc::check_boundedness_sampled(cons, 0.0, radii, 16);
  std::cout << "boundedness probe (" << bd.rays.size() << " rays): "
            << (bd.likely_unbounded ? "SUSPICIOUS: -alpha fails to grow along some ray"
                                    : "no violation found")
            << "\n";
  for (const auto& ray : bd.rays)
    if (ray.suspicious)
      std::cout << "  ray (" << ray.direction.transpose() << "): -alpha " << ray.neg_alpha_first
                << " -> " << ray.neg_alpha_last << "\n";

  const auto points = cfc::critical_point_scan(cons, 0.0, s.roi);
  int bad = 0;
  for (const auto& p : points)
    if (!p.is_maximum) ++bad;
  std::cout << "critical points at t = 0: " << points.size() << " found, " << bad
            << " non-maximum\n";
  for (const auto& p : points)
    std::cout << "  at (" << p.point.transpose() << "), |grad| = " << p.grad_norm
              << ", hessian eigenvalues in [" << p.eig_min << ", " << p.eig_max << "]"
              << (p.is_maximum ? "" : "  <- not a maximum") << "\n";

  return fd.pass ? kOk : kValidationError;
}

int run_plot(const std::string& trace_path, const std::string& oracle_path,
             const std::string& scenario_path, const std::string& kind,
             const std::string& times_spec, const std::string& out_svg) {
  const cfc::SimulationTrace trace = cfc::read_trace_csv(trace_path);
  if (kind == "alpha_timeline") {
    std::vector<std::pair<double, double>> oracle;
    if (!oracle_path.empty()) oracle = cfc::read_oracle_csv(oracle_path);
    write_text(out_svg, cfc::alpha_timeline_svg(trace, oracle));
  } else if (kind == "xy_snapshots") {
    if (scenario_path.empty())
      throw cfc::ScenarioParseError(
          "xy_snapshots draws the constraint contour and needs --scenario <file>");
    const cfc::ScenarioLoad load = load_scenario(scenario_path);
    const cfc::Scenario& s = load.scenario;
    if (s.roi.box.empty())
      throw cfc::ScenarioParseError(scenario_path + ": xy_snapshots needs an [oracle] box");
    std::vector<double> times;
    if (!times_spec.empty()) {
      size_t pos = 0;
      while (pos <= times_spec.size()) {
        const size_t comma = std::min(times_spec.find(',', pos), times_spec.size());
        const std::string item = times_spec.substr(pos, comma - pos);
        pos = comma + 1;
        if (!item.empty()) times.push_back(std::stod(item));
      }
    }
    if (times.empty())
      times = {0.0, 0.5 * s.integration.horizon, s.integration.horizon};
    const cfc::Consolidation cons(s.constraints, s.nu);
    write_text(out_svg, cfc::xy_snapshots_svg(trace, cons, s.roi, times));
  } else {
    throw cfc::ScenarioParseError("unknown plot kind '" + kind +
                                  "' (use alpha_timeline or xy_snapshots)");
  }
  std::cout << "wrote " << out_svg << "\n";
  return kOk;
}

int run_sweep(const std::string& scenario_path, const std::vector<std::string>& patch_specs,
              const std::string& out_dir) {
  const cfc::ScenarioLoad load = load_scenario(scenario_path);
  std::vector<cfc::Patch> patches;
  for (const std::string& spec : patch_specs) patches.push_back(parse_patch(spec));
  const std::vector<cfc::SimulationTrace> traces = cfc::sweep(load.scenario, patches);
  int worst = kOk;
  for (size_t i = 0; i < traces.size(); ++i) {
    const std::string dir = out_dir + "/run_" + std::to_string(i);
    cfc::emit_trace(traces[i], dir);
    std::cout << "run_" << i << " (" << patch_specs[i] << "): " << traces[i].t.size() << " rows"
              << (traces[i].meta.aborted ? " (aborted: " + traces[i].meta.abort_reason + ")" : "")
              << "\n";
    if (traces[i].meta.aborted) worst = kRunAborted;
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"consolidating-funnel control: simulate, audit, and plot"};
  app.require_subcommand(1);

  std::string scenario, out_dir = "out", out_csv = "oracle.csv", out_svg = "plot.svg";
  std::string trace_path, oracle_path, plot_scenario, kind = "alpha_timeline", times_spec;
  std::string grid_spec;
  int resolution = 0, samples = 200;
  std::vector<std::string> patch_specs;

  CLI::App* sim = app.add_subcommand("simulate", "integrate a scenario and write its trace");
  sim->add_option("scenario", scenario, "scenario file")->required();
  sim->add_option("--out", out_dir, "output directory (trace.csv, meta.json, events.log)");

  CLI::App* orc = app.add_subcommand("oracle", "sweep alpha_star over time on a dense grid");
  orc->add_option("scenario", scenario, "scenario file")->required();
  orc->add_option("--grid", grid_spec, "time sweep start:end:step (default 0:horizon:0.1)");
  orc->add_option("--resolution", resolution, "override spatial grid points per axis");
  orc->add_option("--out", out_csv, "output csv path");

  CLI::App* val = app.add_subcommand("validate",
                                     "finite-difference, boundedness, and critical-point audit");
  val->add_option("scenario", scenario, "scenario file")->required();
  val->add_option("--samples", samples, "random samples for the derivative check");

  CLI::App* plt = app.add_subcommand("plot", "render a trace to svg");
  plt->add_option("trace", trace_path, "trace.csv from a simulate run")->required();
  plt->add_option("--oracle", oracle_path, "oracle csv to overlay (alpha_timeline)");
  plt->add_option("--scenario", plot_scenario, "scenario file (required for xy_snapshots)");
  plt->add_option("--kind", kind, "alpha_timeline | xy_snapshots");
  plt->add_option("--times", times_spec, "comma-separated snapshot times (xy_snapshots)");
  plt->add_option("--out", out_svg, "output svg path");

  CLI::App* swp = app.add_subcommand("sweep", "run parameter patches against one scenario");
  swp->add_option("scenario", scenario, "scenario file")->required();
  swp->add_option("--patch", patch_specs, "one run per flag: key=value[,key=value...]")
      ->required();
  swp->add_option("--out", out_dir, "output directory (run_0, run_1, ...)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidationError;
  }

  try {
    if (sim->parsed()) return run_simulate(scenario, out_dir);
    if (orc->parsed())
      return run_oracle(scenario, grid_spec.empty() ? TimeGrid{} : parse_time_grid(grid_spec),
                        resolution, out_csv);
    if (val->parsed()) return run_validate(scenario, samples);
    if (plt->parsed())
      return run_plot(trace_path, oracle_path, plot_scenario, kind, times_spec, out_svg);
    if (swp->parsed()) return run_sweep(scenario, patch_specs, out_dir);
  } catch (const cfc::ScenarioParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const cfc::InitialBoundViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const cfc::ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIoError;
  }
  return kOk;
}
