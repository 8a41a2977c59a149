#include "cfc/sim.hpp"

#include <cmath>

namespace cfc {
namespace {

// Discretization guards: the continuous law never reaches either singularity,
// but a fixed step can land arbitrarily close. At or past these margins the
// run aborts with a recorded event; values are never clamped.
constexpr double kEAlphaFloor = 1e-9;
constexpr double kEHatCeil = 1.0 - 1e-9;

struct Dynamics {
  int n = 0;
  int r = 0;
  int aux = 0;  // trailing states outside the controlled blocks (robot heading)
  std::function<Vec(double, const Vec&, const Vec&)> rhs;
};

Dynamics make_dynamics(const PlantSpec& spec) {
  Dynamics d;
  if (const auto* m = std::get_if<PlantModel>(&spec)) {
    d.n = m->n;
    d.r = m->r;
    d.aux = 0;
    const PlantModel model = *m;
    d.rhs = [model](double t, const Vec& y, const Vec& u) { return plant_rhs(model, t, y, u); };
  } else {
    const RobotParams p = std::get<RobotParams>(spec);
    d.n = 2;
    d.r = 2;
    d.aux = 1;
    d.rhs = [p](double t, const Vec& y, const Vec& u) { return robot_rhs(p, t, y, u); };
  }
  return d;
}

struct BoundState {
  bool adaptive = false;
  StaticBound st;
  AdaptiveBound ad;
  EstimatorState est;
};

double auto_start_bound(double alpha0) {
  return std::min(0.0, alpha0) - std::max(0.25, 0.25 * std::abs(alpha0));
}

}  // namespace

Scenario apply_patch(const Scenario& base, const Patch& patch) {
  Scenario s = base;
  for (const auto& [key, value] : patch) {
    if (key == "nu") {
      s.nu = value;
      s.controller.nu = value;
    } else if (key == "step") {
      s.integration.step = value;
    } else if (key == "horizon") {
      s.integration.horizon = value;
    } else if (key == "stride") {
      s.integration.record_stride = static_cast<int>(value);
    } else if (key == "upsilon") {
      s.controller.upsilon = value;
    } else if (key.size() == 2 && key[0] == 'k' && key[1] >= '1' && key[1] <= '9') {
      const size_t idx = static_cast<size_t>(key[1] - '1');
      if (idx >= s.controller.k.size())
        throw ContractViolation("patch: gain index out of range: " + key);
      s.controller.k[idx] = value;
    } else if (key == "theta_inf" || key == "l") {
      for (auto& row : s.controller.funnels)
        for (auto& f : row) (key == "l" ? f.l : f.theta_inf) = value;
    } else if (key == "T" || key == "beta" || key == "rho0" || key == "rho_inf" ||
               key == "varrho0" || key == "varrho_inf") {
      FiniteTimeBoundParams* p = nullptr;
      if (auto* st = std::get_if<StaticBound>(&s.bound)) p = &st->rho;
      if (auto* ad = std::get_if<AdaptiveBound>(&s.bound)) p = &ad->nominal;
      if (key == "T") p->T = value;
      else if (key == "beta") p->beta = value;
      else if (key == "rho0" || key == "varrho0") p->rho0 = value;
      else p->rho_inf = value;
    } else if (key == "mu" || key == "k_alpha" || key == "eps_g" || key == "mu_chi") {
      auto* ad = std::get_if<AdaptiveBound>(&s.bound);
      if (!ad) throw ContractViolation("patch: " + key + " requires an adaptive bound policy");
      if (key == "mu") ad->mu = value;
      else if (key == "k_alpha") ad->estimator.k_alpha = value;
      else if (key == "eps_g") ad->estimator.eps_g = value;
      else ad->estimator.mu_chi = value;
    } else {
      throw ContractViolation("patch: unknown key: " + key);
    }
  }
  return s;
}

std::vector<SimulationTrace> sweep(const Scenario& base, const std::vector<Patch>& patches) {
  std::vector<SimulationTrace> out;
  out.reserve(patches.size());
  for (const auto& p : patches) out.push_back(run_closed_loop(apply_patch(base, p)));
  return out;
}

SimulationTrace run_closed_loop(const Scenario& s) {
  const Dynamics dyn = make_dynamics(s.plant);
  const Consolidation cons(s.constraints, s.nu);
  if (s.constraints.n() != dyn.n)
    throw ContractViolation("run: constraint set and plant disagree on the block dimension");
  ControllerConfig cfg = s.controller;
  if (cfg.n != dyn.n || cfg.r != dyn.r)
    throw ContractViolation("run: controller shape must match the plant");
  if (cfg.nu != s.nu) throw ContractViolation("run: controller nu must match the consolidation");
  if (s.x0.size() != static_cast<Eigen::Index>(dyn.n) * dyn.r)
    throw ContractViolation("run: x0 must have n*r entries");
  if (!(s.integration.step > 0.0) || !(s.integration.horizon > 0.0))
    throw ContractViolation("run: step and horizon must be positive");
  if (s.integration.record_stride < 1) throw ContractViolation("run: record stride must be >= 1");

  SimulationTrace tr;
  tr.n = dyn.n;
  tr.r = dyn.r;
  tr.has_theta = dyn.aux > 0;
  tr.meta.scenario_name = s.name;
  tr.meta.step = s.integration.step;
  tr.meta.horizon = s.integration.horizon;
  tr.meta.record_stride = s.integration.record_stride;
  for (const auto& spec : s.constraints.specs())
    if (spec.channel.fd_derivatives) tr.meta.fd_channels.push_back(spec.channel.name);

  const Vec x1_0 = s.x0.head(dyn.n);
  const double a0 = alpha(cons, 0.0, x1_0);

  // Resolve the bound policy: fill automatic start values, then insist the
  // run starts strictly below alpha.
  BoundState bs;
  if (const auto* st = std::get_if<StaticBound>(&s.bound)) {
    bs.st = *st;
    if (std::isnan(bs.st.rho.rho0)) bs.st.rho.rho0 = auto_start_bound(a0);
    tr.meta.rho0_resolved = bs.st.rho.rho0;
  } else {
    bs.adaptive = true;
    bs.ad = std::get<AdaptiveBound>(s.bound);
    if (std::isnan(bs.ad.nominal.rho0)) bs.ad.nominal.rho0 = auto_start_bound(a0);
    tr.meta.rho0_resolved = bs.ad.nominal.rho0;
    bs.est.x_tilde = bs.ad.estimator.x_tilde0.size() ? bs.ad.estimator.x_tilde0 : x1_0;
    if (bs.est.x_tilde.size() != dyn.n)
      throw ContractViolation("run: estimator start point must have n entries");
    bs.est.alpha_hat = estimator_output(cons, 0.0, bs.est.x_tilde);
  }
  tr.has_estimator = bs.adaptive;
  tr.meta.adaptive = bs.adaptive;

  auto sample_bound = [&](double t) -> BoundSample {
    if (!bs.adaptive) return finite_time_bound(bs.st.rho, t);
    const double ah = bs.est.alpha_hat;
    const double ahd = estimator_output_dot(cons, bs.ad.estimator, t, bs.est.x_tilde);
    return adaptive_bound(bs.ad, t, ah, ahd);
  };

  const BoundSample b0 = sample_bound(0.0);
  if (!(b0.value < a0))
    throw InitialBoundViolation("run: bound starts at " + std::to_string(b0.value) +
                                " but alpha(0) is only " + std::to_string(a0));

  // Resolve automatic funnel widths level by level: each level's width wraps
  // the initial error left by the previous level's virtual control.
  {
    Vec s_prev = s1(cons, cfg, b0.value, 0.0, x1_0);
    for (int i = 2; i <= cfg.r; ++i) {
      const Vec e = s.x0.segment(static_cast<Eigen::Index>(i - 1) * cfg.n, cfg.n) - s_prev;
      std::vector<BoundSample> th(cfg.n);
      for (int j = 0; j < cfg.n; ++j) {
        PerfFunnelParams& f = cfg.funnels[i - 2][j];
        if (std::isnan(f.theta0))
          f.theta0 = std::max(1.5 * std::abs(e[j]) + 0.1, f.theta_inf);
        tr.meta.theta0_resolved.push_back(f.theta0);
        th[j] = perf_funnel(f, 0.0);
      }
      const FunnelTransform ft = normalize_and_transform(e, th, i, 0.0);
      s_prev = s_i(cfg.k[i - 1], ft.xi, ft.eps);
    }
  }

  const double h = s.integration.step;
  const long steps = std::lround(s.integration.horizon / h);
  const int stride = s.integration.record_stride;

  Vec y(s.x0.size() + dyn.aux);
  y.head(s.x0.size()) = s.x0;
  if (dyn.aux > 0) y[s.x0.size()] = s.theta0;

  auto record = [&](double t, const Vec& state, const BoundSample& b,
                    const ControllerDiagnostics& diag, const Vec& u,
                    const std::string& event) {
    tr.t.push_back(t);
    tr.x.push_back(state.head(static_cast<Eigen::Index>(dyn.n) * dyn.r));
    if (dyn.aux > 0) tr.theta.push_back(state[state.size() - 1]);
    tr.u.push_back(u);
    tr.alpha.push_back(diag.alpha);
    tr.alpha_bar.push_back(alpha_bar(s.constraints, t, state.head(dyn.n)));
    tr.rho_alpha.push_back(b.value);
    if (bs.adaptive) {
      tr.varrho.push_back(finite_time_bound(bs.ad.nominal, t).value);
      tr.alpha_hat.push_back(bs.est.alpha_hat);
      tr.x_tilde.push_back(bs.est.x_tilde);
    }
    tr.e_alpha.push_back(diag.e_alpha);
    tr.eps_alpha.push_back(diag.eps_alpha);
    // Levels the controller never reached (abort rows) stay NaN.
    Vec eh = Vec::Constant(static_cast<Eigen::Index>(dyn.n) * (dyn.r - 1), std::nan(""));
    for (size_t i = 0; i < diag.e_hat.size(); ++i)
      eh.segment(static_cast<Eigen::Index>(i) * dyn.n, dyn.n) = diag.e_hat[i];
    tr.e_hat.push_back(eh);
    tr.event.push_back(event);
  };

  auto abort_run = [&](double t, const Vec& state, const BoundSample& b,
                       const ControllerDiagnostics& diag, const std::string& kind,
                       const std::string& detail) {
    tr.events.push_back({t, kind, detail});
    tr.meta.aborted = true;
    tr.meta.abort_time = t;
    tr.meta.abort_reason = kind;
    record(t, state, b, diag, Vec::Constant(dyn.n, std::nan("")), kind);
  };

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * h;
    if (!y.allFinite()) {
      abort_run(t, y, BoundSample{}, ControllerDiagnostics{}, "nonfinite_state", "");
      break;
    }
    const BoundSample b = sample_bound(t);

    ControllerDiagnostics diag;
    Vec u;
    const double a = alpha(cons, t, y.head(dyn.n));
    if (a - b.value <= kEAlphaFloor) {
      diag.alpha = a;
      diag.e_alpha = a - b.value;
      diag.eps_alpha = std::nan("");
      abort_run(t, y, b, diag, "margin_singularity",
                "alpha - rho_alpha = " + std::to_string(a - b.value));
      break;
    }
    try {
      u = control_u(cons, cfg, b, t,
                    y.head(static_cast<Eigen::Index>(dyn.n) * dyn.r), &diag);
    } catch (const IntermediateFunnelSingularity& ex) {
      abort_run(t, y, b, diag, "funnel_singularity", ex.what());
      break;
    }
    double worst_ehat = 0.0;
    for (const Vec& e : diag.e_hat) worst_ehat = std::max(worst_ehat, e.cwiseAbs().maxCoeff());
    if (worst_ehat >= kEHatCeil) {
      abort_run(t, y, b, diag, "funnel_singularity",
                "normalized error at " + std::to_string(worst_ehat));
      break;
    }

    if (k % stride == 0 || k == steps) record(t, y, b, diag, u, "");
    if (k == steps) break;

    // Cascade order: the estimator moves on its own flow first; the plant then
    // integrates with the bound frozen at its start-of-step value, since the
    // estimate is only defined at step boundaries. A purely static bound is an
    // explicit function of time, so the plant stages evaluate it exactly.
    if (bs.adaptive) {
      bs.est.x_tilde = rk4_step(
          [&](double tt, const Vec& xt) { return estimator_rhs(cons, bs.ad.estimator, tt, xt); },
          t, bs.est.x_tilde, h);
      bs.est.alpha_hat = estimator_output(cons, t + h, bs.est.x_tilde);
    }
    std::string stage_kind, stage_detail;
    auto closed_rhs = [&](double tt, const Vec& yy) -> Vec {
      const BoundSample bb = bs.adaptive ? b : finite_time_bound(bs.st.rho, tt);
      try {
        const Vec uu = control_u(cons, cfg, bb, tt,
                                 yy.head(static_cast<Eigen::Index>(dyn.n) * dyn.r));
        return dyn.rhs(tt, yy, uu);
      } catch (const ConstraintTransformSingularity& ex) {
        stage_kind = "margin_singularity";
        stage_detail = ex.what();
      } catch (const IntermediateFunnelSingularity& ex) {
        stage_kind = "funnel_singularity";
        stage_detail = ex.what();
      }
      return Vec::Constant(y.size(), std::nan(""));
    };
    const Vec y_next = rk4_step(closed_rhs, t, y, h);
    if (!stage_kind.empty()) {
      abort_run(t, y, b, diag, stage_kind, stage_detail);
      break;
    }
    y = y_next;
  }
  return tr;
}

}  // namespace cfc
