#include "cfc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "cfc/errors.hpp"

namespace cfc {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (lo > hi) {
      lo = 0;
      hi = 1;
    }
    if (lo == hi) {
      lo -= 1;
      hi += 1;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

// Multiples of 1, 2, or 5 times a power of ten, at most ten ticks.
std::vector<double> ticks(const Range& r) {
  const double span = r.hi - r.lo;
  double step = std::pow(10.0, std::floor(std::log10(span / 5.0)));
  if (span / step > 10.0) step *= 2.0;
  if (span / step > 10.0) step *= 2.5;
  if (span / step > 10.0) step *= 2.0;
  std::vector<double> out;
  const double first = std::ceil(r.lo / step) * step;
  for (double v = first; v <= r.hi + 1e-12 * span; v += step) out.push_back(v);
  return out;
}

struct Series {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> pts;
};

std::string polyline_path(const Series& s, const Range& rx, const Range& ry, double x0, double y0,
                          double w, double h) {
  const auto sx = [&](double x) { return x0 + (x - rx.lo) / (rx.hi - rx.lo) * w; };
  const auto sy = [&](double y) { return y0 + h - (y - ry.lo) / (ry.hi - ry.lo) * h; };
  std::string d;
  bool pen_down = false;
  for (const auto& [x, y] : s.pts) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
      pen_down = false;
      continue;
    }
    d += pen_down ? " L " : " M ";
    d += num(sx(x)) + " " + num(sy(y));
    pen_down = true;
  }
  return d;
}

void draw_frame(std::ostringstream& svg, const Range& rx, const Range& ry, double x0, double y0,
                double w, double h) {
  svg << "<rect x='" << num(x0) << "' y='" << num(y0) << "' width='" << num(w) << "' height='"
      << num(h) << "' fill='white' stroke='#444'/>\n";
  const auto sx = [&](double x) { return x0 + (x - rx.lo) / (rx.hi - rx.lo) * w; };
  const auto sy = [&](double y) { return y0 + h - (y - ry.lo) / (ry.hi - ry.lo) * h; };
  for (double v : ticks(rx)) {
    svg << "<line x1='" << num(sx(v)) << "' y1='" << num(y0 + h) << "' x2='" << num(sx(v))
        << "' y2='" << num(y0 + h + 4) << "' stroke='#444'/>\n";
    svg << "<text x='" << num(sx(v)) << "' y='" << num(y0 + h + 16)
        << "' font-size='10' text-anchor='middle' fill='#222'>" << num(v) << "</text>\n";
  }
  for (double v : ticks(ry)) {
    svg << "<line x1='" << num(x0 - 4) << "' y1='" << num(sy(v)) << "' x2='" << num(x0)
        << "' y2='" << num(sy(v)) << "' stroke='#444'/>\n";
    svg << "<text x='" << num(x0 - 6) << "' y='" << num(sy(v) + 3)
        << "' font-size='10' text-anchor='end' fill='#222'>" << num(v) << "</text>\n";
  }
}

}  // namespace

std::string alpha_timeline_svg(const SimulationTrace& trace,
                               const std::vector<std::pair<double, double>>& oracle) {
  std::vector<Series> series;
  const auto column = [&](const std::vector<double>& col, const char* name, const char* color) {
    if (col.empty()) return;
    Series s{name, color, {}};
    for (size_t k = 0; k < trace.t.size(); ++k) s.pts.emplace_back(trace.t[k], col[k]);
    series.push_back(std::move(s));
  };
  column(trace.alpha, "alpha", "#1f77b4");
  column(trace.rho_alpha, "rho_alpha", "#d62728");
  if (trace.has_estimator) {
    column(trace.varrho, "varrho", "#ff7f0e");
    column(trace.alpha_hat, "alpha_hat", "#2ca02c");
  }
  if (!oracle.empty()) series.push_back({"alpha_star", "#9467bd", oracle});

  Range rx, ry;
  for (const Series& s : series)
    for (const auto& [x, y] : s.pts) {
      rx.add(x);
      ry.add(y);
    }
  rx.pad();
  ry.pad();

  const double x0 = 60, y0 = 20, w = 780, h = 470;
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='900' height='560' "
         "viewBox='0 0 900 560'>\n<rect width='900' height='560' fill='white'/>\n";
  draw_frame(svg, rx, ry, x0, y0, w, h);
  if (ry.lo < 0 && ry.hi > 0) {
    const double zy = y0 + h - (0 - ry.lo) / (ry.hi - ry.lo) * h;
    svg << "<line x1='" << num(x0) << "' y1='" << num(zy) << "' x2='" << num(x0 + w) << "' y2='"
        << num(zy) << "' stroke='#bbb' stroke-dasharray='4 3'/>\n";
  }
  for (const Series& s : series)
    svg << "<path d='" << polyline_path(s, rx, ry, x0, y0, w, h) << "' fill='none' stroke='"
        << s.color << "' stroke-width='1.5'/>\n";
  svg << "<text x='" << num(x0 + w / 2) << "' y='552' font-size='12' text-anchor='middle' "
         "fill='#222'>t</text>\n";
  double ly = y0 + 14;
  for (const Series& s : series) {
    svg << "<line x1='" << num(x0 + w - 150) << "' y1='" << num(ly - 4) << "' x2='"
        << num(x0 + w - 120) << "' y2='" << num(ly - 4) << "' stroke='" << s.color
        << "' stroke-width='2'/>\n";
    svg << "<text x='" << num(x0 + w - 114) << "' y='" << num(ly) << "' font-size='12' "
        << "fill='#222'>" << s.name << "</text>\n";
    ly += 16;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string xy_snapshots_svg(const SimulationTrace& trace, const Consolidation& cons,
                             const GridSpec& roi, const std::vector<double>& times) {
  if (cons.set.n() != 2) throw ContractViolation("xy snapshots need a planar constraint set");
  if (roi.box.size() != 2) throw ContractViolation("xy snapshots need a planar roi box");
  if (times.empty()) throw ContractViolation("xy snapshots need at least one time");
  if (trace.n != 2) throw ContractViolation("xy snapshots need a planar trace");

  const double panel = 300, title_h = 24, gap = 20;
  const int cols = std::min<int>(3, static_cast<int>(times.size()));
  const int rows = (static_cast<int>(times.size()) + cols - 1) / cols;
  const double width = cols * panel + (cols + 1) * gap;
  const double height = rows * (panel + title_h) + (rows + 1) * gap;

  Range rx, ry;
  rx.add(roi.box[0].first);
  rx.add(roi.box[0].second);
  ry.add(roi.box[1].first);
  ry.add(roi.box[1].second);

  const int res = std::min(roi.resolution, 151);
  const double cx = (rx.hi - rx.lo) / (res - 1);
  const double cy = (ry.hi - ry.lo) / (res - 1);

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << num(width) << "' height='"
      << num(height) << "' viewBox='0 0 " << num(width) << " " << num(height)
      << "'>\n<rect width='" << num(width) << "' height='" << num(height)
      << "' fill='white'/>\n";

  for (size_t p = 0; p < times.size(); ++p) {
    const double t = times[p];
    const double px = gap + (p % cols) * (panel + gap);
    const double py = gap + (p / cols) * (panel + title_h + gap) + title_h;
    const auto sx = [&](double x) { return px + (x - rx.lo) / (rx.hi - rx.lo) * panel; };
    const auto sy = [&](double y) { return py + panel - (y - ry.lo) / (ry.hi - ry.lo) * panel; };

    svg << "<text x='" << num(px + panel / 2) << "' y='" << num(py - 8)
        << "' font-size='13' text-anchor='middle' fill='#222'>t = " << num(t) << "</text>\n";
    svg << "<rect x='" << num(px) << "' y='" << num(py) << "' width='" << num(panel)
        << "' height='" << num(panel) << "' fill='white' stroke='#444'/>\n";

    // Zero contour of alpha by marching squares; ambiguous saddles split by
    // the cell-center sample.
    Mat field(res, res);
    for (int i = 0; i < res; ++i)
      for (int j = 0; j < res; ++j)
        field(i, j) = alpha(cons, t, Vec(Eigen::Vector2d(rx.lo + i * cx, ry.lo + j * cy)));
    std::string contour;
    const auto lerp = [](double a, double b) { return a / (a - b); };
    for (int i = 0; i + 1 < res; ++i) {
      for (int j = 0; j + 1 < res; ++j) {
        const double x = rx.lo + i * cx, y = ry.lo + j * cy;
        const double f00 = field(i, j), f10 = field(i + 1, j);
        const double f01 = field(i, j + 1), f11 = field(i + 1, j + 1);
        int mask = (f00 > 0) | ((f10 > 0) << 1) | ((f11 > 0) << 2) | ((f01 > 0) << 3);
        if (mask == 0 || mask == 15) continue;
        // Edge crossing points: bottom, right, top, left.
        const double bx = x + cx * lerp(f00, f10), by = y;
        const double rxc = x + cx, ryc = y + cy * lerp(f10, f11);
        const double tx = x + cx * lerp(f01, f11), ty = y + cy;
        const double lx = x, lyc = y + cy * lerp(f00, f01);
        const auto seg = [&](double ax, double ay, double bx2, double by2) {
          contour += " M " + num(sx(ax)) + " " + num(sy(ay)) + " L " + num(sx(bx2)) + " " +
                     num(sy(by2));
        };
        switch (mask) {
          case 1: case 14: seg(lx, lyc, bx, by); break;
          case 2: case 13: seg(bx, by, rxc, ryc); break;
          case 3: case 12: seg(lx, lyc, rxc, ryc); break;
          case 4: case 11: seg(rxc, ryc, tx, ty); break;
          case 6: case 9: seg(bx, by, tx, ty); break;
          case 7: case 8: seg(lx, lyc, tx, ty); break;
          case 5: case 10: {
            const double fc = alpha(
                cons, t, Vec(Eigen::Vector2d(x + 0.5 * cx, y + 0.5 * cy)));
            const bool center_pos = fc > 0;
            const bool diag_00 = (mask == 5);  // corners 00 and 11 positive
            if (diag_00 == center_pos) {
              seg(lx, lyc, bx, by);
              seg(rxc, ryc, tx, ty);
            } else {
              seg(lx, lyc, tx, ty);
              seg(bx, by, rxc, ryc);
            }
            break;
          }
          default: break;
        }
      }
    }
    if (!contour.empty())
      svg << "<path d='" << contour << "' fill='none' stroke='#2ca02c' stroke-width='1.5'/>\n";

    // Trajectory up to this snapshot, clipped to the panel range.
    std::string path;
    bool pen_down = false;
    size_t last_row = 0;
    for (size_t k = 0; k < trace.t.size() && trace.t[k] <= t + 1e-12; ++k) {
      last_row = k;
      const double x = trace.x[k][0], y = trace.x[k][1];
      if (!std::isfinite(x) || !std::isfinite(y) || x < rx.lo || x > rx.hi || y < ry.lo ||
          y > ry.hi) {
        pen_down = false;
        continue;
      }
      path += pen_down ? " L " : " M ";
      path += num(sx(x)) + " " + num(sy(y));
      pen_down = true;
    }
    if (!path.empty())
      svg << "<path d='" << path << "' fill='none' stroke='#1f77b4' stroke-width='1.2'/>\n";
    if (!trace.t.empty()) {
      const double x = trace.x[last_row][0], y = trace.x[last_row][1];
      if (std::isfinite(x) && std::isfinite(y) && x >= rx.lo && x <= rx.hi && y >= ry.lo &&
          y <= ry.hi)
        svg << "<circle cx='" << num(sx(x)) << "' cy='" << num(sy(y))
            << "' r='4' fill='#d62728'/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace cfc
