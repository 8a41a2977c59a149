#include "cfc/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cfc/errors.hpp"

namespace cfc {
namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw ContractViolation(msg);
}

void check_grid(const Consolidation& c, const GridSpec& grid) {
  require(static_cast<int>(grid.box.size()) == c.set.n(), "grid box dimension mismatch");
  require(grid.resolution >= 2, "grid needs at least two points per dimension");
  for (const auto& [lo, hi] : grid.box) require(lo < hi, "grid box side is empty");
}

Vec grid_point(const GridSpec& grid, const std::vector<int>& idx) {
  const int n = static_cast<int>(grid.box.size());
  Vec x(n);
  for (int d = 0; d < n; ++d) {
    const auto [lo, hi] = grid.box[d];
    x[d] = lo + (hi - lo) * idx[d] / (grid.resolution - 1);
  }
  return x;
}

// Visits every grid index combination in row-major order.
template <class F>
void for_each_cell(int n, int resolution, F&& f) {
  std::vector<int> idx(n, 0);
  for (;;) {
    f(idx);
    int d = n - 1;
    while (d >= 0 && ++idx[d] == resolution) idx[d--] = 0;
    if (d < 0) break;
  }
}

double cell_width(const GridSpec& grid, int d) {
  return (grid.box[d].second - grid.box[d].first) / (grid.resolution - 1);
}

Vec clip_to_box(const GridSpec& grid, Vec x) {
  for (int d = 0; d < x.size(); ++d)
    x[d] = std::clamp(x[d], grid.box[d].first, grid.box[d].second);
  return x;
}

bool near_box_edge(const GridSpec& grid, const Vec& x) {
  for (int d = 0; d < x.size(); ++d) {
    const double w = cell_width(grid, d);
    if (x[d] <= grid.box[d].first + w || x[d] >= grid.box[d].second - w) return true;
  }
  return false;
}

double rel_err(double got, double ref) {
  return std::abs(got - ref) / std::max(1.0, std::abs(ref));
}

double rel_err(const Vec& got, const Vec& ref) {
  return (got - ref).cwiseAbs().maxCoeff() / std::max(1.0, ref.cwiseAbs().maxCoeff());
}

double rel_err(const Mat& got, const Mat& ref) {
  return (got - ref).cwiseAbs().maxCoeff() / std::max(1.0, ref.cwiseAbs().maxCoeff());
}

}  // namespace

OracleResult alpha_star_grid(const Consolidation& c, double t, const GridSpec& grid) {
  check_grid(c, grid);
  const int n = c.set.n();

  OracleResult out;
  out.alpha_star = -std::numeric_limits<double>::infinity();
  out.alpha_bar_star = -std::numeric_limits<double>::infinity();
  Vec best(n);
  for_each_cell(n, grid.resolution, [&](const std::vector<int>& idx) {
    const Vec x = grid_point(grid, idx);
    const Vec psi = eval_psi(c.set, t, x);
    const double ab = psi.minCoeff();
    out.alpha_bar_star = std::max(out.alpha_bar_star, ab);
    const double a = alpha(c, t, x);
    if (a > out.alpha_star) {
      out.alpha_star = a;
      best = x;
    }
  });

  // Ascent polish from the best cell. The best visited point wins, so a finer
  // grid can only raise the result; iterates stay inside the box so runaway
  // ascent on a non-coercive set pins the argmax to the edge instead.
  const double rate = grid.polish_rate > 0 ? grid.polish_rate : 0.1 / c.nu;
  Vec x = best;
  for (int it = 0; it < grid.polish_steps; ++it) {
    x = clip_to_box(grid, Vec(x + rate * grad_alpha(c, t, x)));
    const double a = alpha(c, t, x);
    if (a > out.alpha_star) {
      out.alpha_star = a;
      best = x;
    }
  }
  out.argmax = best;
  out.on_boundary = near_box_edge(grid, best);
  out.alpha_bar_star = std::max(out.alpha_bar_star, alpha_bar(c.set, t, best));
  return out;
}

ViolationReport violation_report(const SimulationTrace& trace, const Consolidation& c,
                                 const GridSpec& grid, double mu, int max_points) {
  (void)mu;  // the gap criterion mu + max e_tilde is the caller's to assert
  ViolationReport rep;
  const int rows = static_cast<int>(trace.t.size());
  if (rows == 0) return rep;
  check_grid(c, grid);
  require(max_points >= 2, "violation report needs at least two sample points");

  const int stride = std::max(1, (rows - 1) / (max_points - 1));
  const double infeasible_margin = std::log(static_cast<double>(c.set.psi_size())) / c.nu;

  struct Sample {
    double t;
    bool infeasible;
    double gap;
    double est_err;
  };
  std::vector<Sample> samples;
  for (int k = 0; k < rows; k += stride) {
    const double t = trace.t[k];
    const OracleResult res = alpha_star_grid(c, t, grid);
    // The exact set is empty when its best margin is negative. The grid bound
    // underestimates the true maximum, so pair it with the softmin bracket
    // alpha_bar_star <= alpha_star + ln(m+p)/nu for deeply infeasible spans.
    const bool infeasible =
        res.alpha_bar_star < 0.0 || res.alpha_star + infeasible_margin < 0.0;
    Sample s;
    s.t = t;
    s.infeasible = infeasible;
    s.gap = res.alpha_star - trace.alpha[k];
    s.est_err = trace.has_estimator ? res.alpha_star - trace.alpha_hat[k]
                                    : 0.0;
    samples.push_back(s);
  }

  for (size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].infeasible) continue;
    size_t j = i;
    while (j + 1 < samples.size() && samples[j + 1].infeasible) ++j;
    rep.infeasible_windows.push_back({samples[i].t, samples[j].t});
    i = j;
  }

  const bool windowed = !rep.infeasible_windows.empty();
  bool any = false;
  for (const Sample& s : samples) {
    if (windowed && !s.infeasible) continue;
    if (!any) {
      rep.max_gap = s.gap;
      rep.estimation_error_max = s.est_err;
      any = true;
    } else {
      rep.max_gap = std::max(rep.max_gap, s.gap);
      rep.estimation_error_max = std::max(rep.estimation_error_max, s.est_err);
    }
  }
  return rep;
}

BoundednessReport check_boundedness_sampled(const Consolidation& c, double t,
                                            const std::vector<double>& radii, int directions) {
  require(radii.size() >= 2, "boundedness probe needs at least two radii");
  for (size_t i = 1; i < radii.size(); ++i)
    require(radii[i] > radii[i - 1], "radii must be increasing");
  require(directions >= 2, "boundedness probe needs at least two directions");
  const int n = c.set.n();

  std::vector<Vec> dirs;
  if (n == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
  } else if (n == 2) {
    for (int k = 0; k < directions; ++k) {
      const double a = 2.0 * M_PI * k / directions;
      dirs.push_back(Vec(Eigen::Vector2d(std::cos(a), std::sin(a))));
    }
  } else {
    // Axis rays catch the common escapes exactly; the rest is a seeded spray.
    std::mt19937 rng(7);
    std::normal_distribution<double> gauss;
    for (int d = 0; d < n; ++d) {
      dirs.push_back(Vec(Vec::Unit(n, d)));
      dirs.push_back(Vec(-Vec::Unit(n, d)));
    }
    while (static_cast<int>(dirs.size()) < directions) {
      Vec v(n);
      for (int d = 0; d < n; ++d) v[d] = gauss(rng);
      if (v.norm() > 1e-9) dirs.push_back(Vec(v / v.norm()));
    }
  }

  BoundednessReport rep;
  rep.min_neg_alpha_per_radius.assign(radii.size(), std::numeric_limits<double>::infinity());
  for (const Vec& d : dirs) {
    RayGrowth ray;
    ray.direction = d;
    for (size_t i = 0; i < radii.size(); ++i) {
      const double na = -alpha(c, t, Vec(radii[i] * d));
      rep.min_neg_alpha_per_radius[i] = std::min(rep.min_neg_alpha_per_radius[i], na);
      if (i == 0) ray.neg_alpha_first = na;
      if (i + 1 == radii.size()) ray.neg_alpha_last = na;
    }
    ray.suspicious = ray.neg_alpha_last < ray.neg_alpha_first + 1.0;
    rep.likely_unbounded = rep.likely_unbounded || ray.suspicious;
    rep.rays.push_back(std::move(ray));
  }
  return rep;
}

std::vector<CriticalPoint> critical_point_scan(const Consolidation& c, double t,
                                               const GridSpec& grid, double grad_tol) {
  check_grid(c, grid);
  const int n = c.set.n();
  const int res = grid.resolution;

  // Gradient norm field over the grid; row-major flattening matches
  // for_each_cell's visiting order.
  std::vector<double> norm;
  norm.reserve(static_cast<size_t>(std::pow(res, n)));
  for_each_cell(n, res, [&](const std::vector<int>& idx) {
    norm.push_back(grad_alpha(c, t, grid_point(grid, idx)).norm());
  });

  const auto flat = [&](const std::vector<int>& idx) {
    size_t f = 0;
    for (int d = 0; d < n; ++d) f = f * res + idx[d];
    return f;
  };

  // Seeds: interior cells whose gradient norm is a local minimum and small
  // enough to plausibly polish down to a stationary point.
  const double seed_tol = 0.75;
  std::vector<Vec> seeds;
  for_each_cell(n, res, [&](const std::vector<int>& idx) {
    const double here = norm[flat(idx)];
    if (here >= seed_tol) return;
    std::vector<int> nb = idx;
    for (int d = 0; d < n; ++d) {
      if (idx[d] == 0 || idx[d] == res - 1) return;  // interior only
      for (int step : {-1, 1}) {
        nb[d] = idx[d] + step;
        if (norm[flat(nb)] < here) {
          nb[d] = idx[d];
          return;
        }
        nb[d] = idx[d];
      }
    }
    seeds.push_back(grid_point(grid, idx));
  });

  double max_cell = 0.0;
  for (int d = 0; d < n; ++d) max_cell = std::max(max_cell, cell_width(grid, d));

  std::vector<CriticalPoint> found;
  for (Vec x : seeds) {
    // Newton iteration on grad alpha = 0, steps clipped to one cell so a
    // near-singular Hessian cannot fling the iterate out of its basin.
    for (int it = 0; it < 10; ++it) {
      const Vec g = grad_alpha(c, t, x);
      if (g.norm() < grad_tol) break;
      const Mat H = hessian_alpha(c, t, x);
      Eigen::FullPivLU<Mat> lu(H);
      if (!lu.isInvertible()) break;
      Vec step = lu.solve(Vec(-g));
      const double sn = step.norm();
      if (sn > max_cell) step *= max_cell / sn;
      x = clip_to_box(grid, Vec(x + step));
    }
    const double gn = grad_alpha(c, t, x).norm();
    if (gn >= grad_tol) continue;

    bool duplicate = false;
    for (const CriticalPoint& p : found)
      if ((p.point - x).cwiseAbs().maxCoeff() <= max_cell) {
        duplicate = true;
        break;
      }
    if (duplicate) continue;

    CriticalPoint p;
    p.point = x;
    p.grad_norm = gn;
    Eigen::SelfAdjointEigenSolver<Mat> eig(hessian_alpha(c, t, x));
    p.eig_min = eig.eigenvalues().minCoeff();
    p.eig_max = eig.eigenvalues().maxCoeff();
    p.is_maximum = p.eig_max <= 1e-9;
    found.push_back(std::move(p));
  }
  return found;
}

FdReport fd_validate(const Consolidation& c, const GridSpec& box, double t_lo, double t_hi,
                     int sample_count, const FdTolerances& tol, unsigned seed) {
  FdReport rep;
  if (c.set.channels() == 0) {
    rep.pass = true;  // nothing to disagree with
    return rep;
  }
  check_grid(c, box);
  require(t_lo <= t_hi, "fd_validate: empty time range");
  const int n = c.set.n();

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ut(t_lo, t_hi);
  std::vector<std::uniform_real_distribution<double>> ux;
  for (const auto& [lo, hi] : box.box) ux.emplace_back(lo, hi);

  const auto fd_grad = [n](auto&& f, double t, const Vec& x) {
    Vec g(n);
    Vec y = x;
    for (int i = 0; i < n; ++i) {
      const double h = 6e-6 * std::max(1.0, std::abs(x[i]));
      y[i] = x[i] + h;
      const double fp = f(t, y);
      y[i] = x[i] - h;
      const double fm = f(t, y);
      y[i] = x[i];
      g[i] = (fp - fm) / (2 * h);
    }
    return g;
  };
  const auto fd_time = [](auto&& f, double t, const Vec& x) {
    const double h = 6e-6 * std::max(1.0, std::abs(t));
    return (f(t + h, x) - f(t - h, x)) / (2 * h);
  };
  const auto fd_hess = [n](auto&& f, double t, const Vec& x) {
    Mat H(n, n);
    const double f0 = f(t, x);
    Vec y = x;
    for (int i = 0; i < n; ++i) {
      const double hi = 1e-4 * std::max(1.0, std::abs(x[i]));
      for (int j = i; j < n; ++j) {
        const double hj = 1e-4 * std::max(1.0, std::abs(x[j]));
        double v;
        if (i == j) {
          y[i] = x[i] + hi;
          const double fp = f(t, y);
          y[i] = x[i] - hi;
          const double fm = f(t, y);
          y[i] = x[i];
          v = (fp - 2 * f0 + fm) / (hi * hi);
        } else {
          y[i] = x[i] + hi;
          y[j] = x[j] + hj;
          const double fpp = f(t, y);
          y[j] = x[j] - hj;
          const double fpm = f(t, y);
          y[i] = x[i] - hi;
          const double fmm = f(t, y);
          y[j] = x[j] + hj;
          const double fmp = f(t, y);
          y[i] = x[i];
          y[j] = x[j];
          v = (fpp - fpm - fmp + fmm) / (4 * hi * hj);
        }
        H(i, j) = v;
        H(j, i) = v;
      }
    }
    return H;
  };

  const auto eval_alpha = [&c](double t, const Vec& x) { return alpha(c, t, x); };

  for (int s = 0; s < sample_count; ++s) {
    const double t = ut(rng);
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = ux[i](rng);

    rep.alpha_grad_rel =
        std::max(rep.alpha_grad_rel, rel_err(grad_alpha(c, t, x), fd_grad(eval_alpha, t, x)));
    rep.alpha_time_rel =
        std::max(rep.alpha_time_rel, rel_err(dalpha_dt(c, t, x), fd_time(eval_alpha, t, x)));
    rep.alpha_hess_rel =
        std::max(rep.alpha_hess_rel, rel_err(hessian_alpha(c, t, x), fd_hess(eval_alpha, t, x)));

    for (const auto& spec : c.set.specs()) {
      const auto& ch = spec.channel;
      if (ch.fd_derivatives) continue;  // would compare FD against itself
      const auto track = [&](double e) {
        const double worst =
            std::max({rep.channel_grad_rel, rep.channel_time_rel, rep.channel_hess_rel});
        if (e > worst) rep.worst_channel = ch.name;
      };
      double e = rel_err(ch.gradient(t, x), fd_grad(ch.value, t, x));
      track(e);
      rep.channel_grad_rel = std::max(rep.channel_grad_rel, e);
      e = rel_err(ch.time_partial(t, x), fd_time(ch.value, t, x));
      track(e);
      rep.channel_time_rel = std::max(rep.channel_time_rel, e);
      e = rel_err(ch.hessian(t, x), fd_hess(ch.value, t, x));
      track(e);
      rep.channel_hess_rel = std::max(rep.channel_hess_rel, e);
    }
  }
  rep.samples = sample_count;
  rep.pass = rep.alpha_grad_rel <= tol.grad && rep.alpha_time_rel <= tol.time &&
             rep.alpha_hess_rel <= tol.hess && rep.channel_grad_rel <= tol.grad &&
             rep.channel_time_rel <= tol.time && rep.channel_hess_rel <= tol.hess;
  return rep;
}

}  // namespace cfc
