#include "cfc/controller.hpp"

#include <cmath>

namespace cfc {
namespace {

void check(const ControllerConfig& cfg) {
  if (cfg.r < 1) throw ContractViolation("controller: chain length r must be >= 1");
  if (cfg.n < 1) throw ContractViolation("controller: block dimension n must be >= 1");
  if (static_cast<int>(cfg.k.size()) != cfg.r)
    throw ContractViolation("controller: need exactly r gains");
  for (double ki : cfg.k)
    if (!(ki > 0.0)) throw ContractViolation("controller: gains must be positive");
  if (!(cfg.upsilon > 0.0)) throw ContractViolation("controller: upsilon must be positive");
  if (static_cast<int>(cfg.funnels.size()) != cfg.r - 1)
    throw ContractViolation("controller: need funnel parameters for levels 2..r");
  for (const auto& row : cfg.funnels)
    if (static_cast<int>(row.size()) != cfg.n)
      throw ContractViolation("controller: each funnel level needs n entries");
}

}  // namespace

double transform_alpha(double e_alpha, double upsilon, double t) {
  if (!(upsilon > 0.0)) throw ContractViolation("transform_alpha: upsilon must be positive");
  if (!(e_alpha > 0.0)) throw ConstraintTransformSingularity(t, e_alpha);
  return std::log(e_alpha / upsilon);
}

Vec s1(const Consolidation& c, const ControllerConfig& cfg, double rho_alpha, double t,
       const Vec& x1) {
  const double e_a = alpha(c, t, x1) - rho_alpha;
  const double eps_a = transform_alpha(e_a, cfg.upsilon, t);
  return (-cfg.k[0] * eps_a / e_a) * grad_alpha(c, t, x1);
}

Vec intermediate_error(const Vec& x_i, const Vec& s_prev) {
  if (x_i.size() != s_prev.size()) throw ContractViolation("intermediate_error: size mismatch");
  return x_i - s_prev;
}

FunnelTransform normalize_and_transform(const Vec& e_i,
                                        const std::vector<BoundSample>& theta_i, int level,
                                        double t) {
  if (static_cast<int>(theta_i.size()) != e_i.size())
    throw ContractViolation("normalize_and_transform: funnel count mismatch");
  FunnelTransform ft;
  ft.e_hat.resize(e_i.size());
  ft.eps.resize(e_i.size());
  ft.xi.resize(e_i.size());
  for (int j = 0; j < e_i.size(); ++j) {
    const double th = theta_i[j].value;
    if (!(th > 0.0)) throw ContractViolation("normalize_and_transform: funnel width must be positive");
    const double eh = e_i[j] / th;
    if (!(std::abs(eh) < 1.0)) throw IntermediateFunnelSingularity(level, j, t);
    ft.e_hat[j] = eh;
    ft.eps[j] = std::log1p(eh) - std::log1p(-eh);  // ln((1+eh)/(1-eh))
    ft.xi[j] = 2.0 / (th * (1.0 - eh * eh));
  }
  return ft;
}

Vec s_i(double k_i, const Vec& xi, const Vec& eps) {
  if (xi.size() != eps.size()) throw ContractViolation("s_i: size mismatch");
  return -k_i * xi.cwiseProduct(eps);
}

Vec control_u(const Consolidation& c, const ControllerConfig& cfg, const BoundSample& bound,
              double t, const Vec& x, ControllerDiagnostics* diag) {
  check(cfg);
  if (x.size() != static_cast<Eigen::Index>(cfg.n) * cfg.r)
    throw ContractViolation("control_u: stacked state must have n*r entries");
  const Vec x1 = x.head(cfg.n);
  const double a = alpha(c, t, x1);
  const double e_a = a - bound.value;
  const double eps_a = transform_alpha(e_a, cfg.upsilon, t);
  Vec s_prev = (-cfg.k[0] * eps_a / e_a) * grad_alpha(c, t, x1);
  if (diag) {
    *diag = ControllerDiagnostics{};
    diag->alpha = a;
    diag->e_alpha = e_a;
    diag->eps_alpha = eps_a;
    diag->s.push_back(s_prev);
  }
  for (int i = 2; i <= cfg.r; ++i) {
    const Vec e = x.segment(static_cast<Eigen::Index>(i - 1) * cfg.n, cfg.n) - s_prev;
    std::vector<BoundSample> th(cfg.n);
    for (int j = 0; j < cfg.n; ++j) th[j] = perf_funnel(cfg.funnels[i - 2][j], t);
    const FunnelTransform ft = normalize_and_transform(e, th, i, t);
    s_prev = s_i(cfg.k[i - 1], ft.xi, ft.eps);
    if (diag) {
      diag->e.push_back(e);
      diag->e_hat.push_back(ft.e_hat);
      diag->xi.push_back(ft.xi);
      diag->s.push_back(s_prev);
    }
  }
  return s_prev;
}

}  // namespace cfc
