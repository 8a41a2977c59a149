#include "cfc/scenario_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cfc/catalog.hpp"
#include "cfc/errors.hpp"
#include "cfc/expr.hpp"

namespace cfc {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct Entry {
  std::string section, key, value;
  int line;
};

struct Doc {
  std::string display;
  std::vector<Entry> entries;
};

[[noreturn]] void fail(const Doc& doc, int line, const std::string& msg) {
  throw ScenarioParseError(doc.display + ":" + std::to_string(line) + ": " + msg);
}

Doc lex(const std::string& text, const std::string& display) {
  Doc doc{display, {}};
  std::istringstream in(text);
  std::string raw, section;
  int ln = 0;
  while (std::getline(in, raw)) {
    ++ln;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(doc, ln, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) fail(doc, ln, "empty section name");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(doc, ln, "expected 'key = value'");
    if (section.empty()) fail(doc, ln, "entry before any [section]");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) fail(doc, ln, "missing key before '='");
    doc.entries.push_back({section, key, trim(s.substr(eq + 1)), ln});
  }
  return doc;
}

std::vector<const Entry*> section_entries(const Doc& doc, const std::string& section) {
  std::vector<const Entry*> out;
  for (const Entry& e : doc.entries)
    if (e.section == section) out.push_back(&e);
  return out;
}

const Entry* find_unique(const Doc& doc, const std::string& section, const std::string& key) {
  const Entry* found = nullptr;
  for (const Entry& e : doc.entries) {
    if (e.section != section || e.key != key) continue;
    if (found) fail(doc, e.line, "duplicate key '" + key + "' in [" + section + "]");
    found = &e;
  }
  return found;
}

const Entry& need(const Doc& doc, const std::string& section, const std::string& key) {
  const Entry* e = find_unique(doc, section, key);
  if (!e) throw ScenarioParseError(doc.display + ": missing required [" + section + "] " + key);
  return *e;
}

double number(const Doc& doc, const Entry& e) {
  size_t idx = 0;
  double v = 0.0;
  try {
    v = std::stod(e.value, &idx);
  } catch (const std::exception&) {
    fail(doc, e.line, e.key + ": expected a number, got '" + e.value + "'");
  }
  if (trim(e.value.substr(idx)) != "")
    fail(doc, e.line, e.key + ": trailing characters after number in '" + e.value + "'");
  return v;
}

double number_or_auto(const Doc& doc, const Entry& e) {
  if (e.value == "auto") return std::numeric_limits<double>::quiet_NaN();
  return number(doc, e);
}

int integer(const Doc& doc, const Entry& e) {
  const double v = number(doc, e);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) fail(doc, e.line, e.key + ": expected an integer");
  return i;
}

std::vector<double> number_list(const Doc& doc, const Entry& e) {
  std::istringstream in(e.value);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) fail(doc, e.line, e.key + ": expected a whitespace-separated number list");
  return out;
}

void check_known_keys(const Doc& doc, const std::string& section,
                      std::initializer_list<const char*> known) {
  for (const Entry* e : section_entries(doc, section)) {
    bool ok = false;
    for (const char* k : known) ok = ok || e->key == k;
    if (!ok) fail(doc, e->line, "unknown key '" + e->key + "' in [" + section + "]");
  }
}

bool valid_param_name(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') return false;
  static const char* reserved[] = {"t", "pi", "sin", "cos", "exp"};
  for (const char* r : reserved)
    if (s == r) return false;
  return s.rfind("x1_", 0) != 0;
}

ExprPtr parse_expr(const Doc& doc, const Entry& e, const std::string& src, int n,
                   const ParamEnv& env) {
  try {
    return Expr::parse(src, n, env);
  } catch (const std::exception& ex) {
    fail(doc, e.line, std::string(ex.what()));
  }
}

TimeFunction bound_expr(const Doc& doc, const Entry& e, const std::string& src,
                        const ParamEnv& env) {
  return expr_time_function(parse_expr(doc, e, src, 0, env));
}

std::vector<std::string> split_pipes(const std::string& s) {
  std::vector<std::string> parts;
  size_t start = 0;
  for (;;) {
    const auto bar = s.find('|', start);
    if (bar == std::string::npos) {
      parts.push_back(trim(s.substr(start)));
      return parts;
    }
    parts.push_back(trim(s.substr(start, bar - start)));
    start = bar + 1;
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    out += ch;
    if (ch == '"') out += '"';
  }
  out += '"';
  return out;
}

// Splits one CSV record, undoing RFC-4180 quoting.
std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double csv_number(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw ScenarioParseError("trace csv: bad number '" + s + "' in " + where);
  return v;
}

}  // namespace

ScenarioLoad parse_scenario_text(const std::string& text, const std::string& display_name) {
  const Doc doc = lex(text, display_name);
  ScenarioLoad load;
  Scenario& s = load.scenario;

  {
    std::filesystem::path p(display_name);
    s.name = p.stem().string();
  }

  // [plant]
  check_known_keys(doc, "plant", {"type", "n", "r", "m_R", "I_R", "D1", "D2", "L", "disturbance"});
  const Entry& type = need(doc, "plant", "type");
  int n = 0, r = 0;
  bool robot = false;
  if (type.value == "robot") {
    robot = true;
    n = 2;
    r = 2;
    RobotParams rp;
    if (const Entry* e = find_unique(doc, "plant", "m_R")) rp.m_R = number(doc, *e);
    if (const Entry* e = find_unique(doc, "plant", "I_R")) rp.I_R = number(doc, *e);
    if (const Entry* e = find_unique(doc, "plant", "D1")) rp.D1 = number(doc, *e);
    if (const Entry* e = find_unique(doc, "plant", "D2")) rp.D2 = number(doc, *e);
    if (const Entry* e = find_unique(doc, "plant", "L")) rp.L = number(doc, *e);
    rp.disturbance = default_disturbance;
    if (const Entry* e = find_unique(doc, "plant", "disturbance")) {
      if (e->value == "none")
        rp.disturbance = nullptr;
      else if (e->value != "default")
        fail(doc, e->line, "disturbance must be 'default' or 'none'");
    }
    if (!(rp.m_R > 0) || !(rp.I_R > 0) || !(rp.L > 0) || rp.D1 < 0 || rp.D2 < 0)
      fail(doc, type.line, "robot parameters must be positive (drag coefficients nonnegative)");
    s.plant = rp;
  } else if (type.value == "integrator_chain") {
    n = integer(doc, need(doc, "plant", "n"));
    r = integer(doc, need(doc, "plant", "r"));
    if (n < 1 || r < 1) fail(doc, type.line, "integrator chain needs n >= 1 and r >= 1");
    s.plant = integrator_chain(n, r);
  } else {
    fail(doc, type.line, "unknown plant type '" + type.value + "'");
  }

  // [params]
  ParamEnv env;
  for (const Entry* e : section_entries(doc, "params")) {
    if (!valid_param_name(e->key))
      fail(doc, e->line, "bad parameter name '" + e->key + "' (reserved or not an identifier)");
    if (env.count(e->key)) fail(doc, e->line, "duplicate parameter '" + e->key + "'");
    env[e->key] = parse_expr(doc, *e, e->value, 0, env);
  }

  // [constraints]
  check_known_keys(doc, "constraints", {"catalog", "constraint"});
  const Entry* cat = find_unique(doc, "constraints", "catalog");
  const auto lines = section_entries(doc, "constraints");
  bool have_roi_default = false;
  if (cat) {
    for (const Entry* e : lines)
      if (e->key == "constraint")
        fail(doc, e->line, "constraint lines cannot be mixed with a catalog set");
    if (!catalog_has_set(cat->value))
      fail(doc, cat->line, "unknown catalog set '" + cat->value + "'");
    s.constraints = catalog_set(cat->value);
    if (s.constraints.n() != n)
      fail(doc, cat->line, "catalog set '" + cat->value + "' expects state dimension " +
                               std::to_string(s.constraints.n()));
    s.roi = catalog_roi(cat->value);
    have_roi_default = true;
  } else {
    std::vector<ConstraintSpec> specs;
    int stage = 0;  // 0 funnel, 1 lower, 2 upper
    int index = 0;
    for (const Entry* e : lines) {
      const auto parts = split_pipes(e->value);
      if (parts.size() < 2) fail(doc, e->line, "constraint needs 'kind | expression | bounds'");
      const std::string& kind = parts[0];
      std::string lower_src, upper_src;
      for (size_t i = 2; i < parts.size(); ++i) {
        if (parts[i].rfind("lower:", 0) == 0 && lower_src.empty())
          lower_src = trim(parts[i].substr(6));
        else if (parts[i].rfind("upper:", 0) == 0 && upper_src.empty())
          upper_src = trim(parts[i].substr(6));
        else
          fail(doc, e->line, "unexpected constraint clause '" + parts[i] + "'");
      }
      ConstraintSpec spec;
      spec.channel = expr_channel("h" + std::to_string(++index), n,
                                  parse_expr(doc, *e, parts[1], n, env));
      int this_stage;
      if (kind == "funnel") {
        if (lower_src.empty() || upper_src.empty())
          fail(doc, e->line, "funnel constraint needs both 'lower:' and 'upper:'");
        spec.bound = FunnelBound{bound_expr(doc, *e, lower_src, env),
                                 bound_expr(doc, *e, upper_src, env)};
        this_stage = 0;
      } else if (kind == "lower") {
        if (lower_src.empty() || !upper_src.empty())
          fail(doc, e->line, "lower constraint needs exactly one 'lower:' clause");
        spec.bound = LowerBound{bound_expr(doc, *e, lower_src, env)};
        this_stage = 1;
      } else if (kind == "upper") {
        if (upper_src.empty() || !lower_src.empty())
          fail(doc, e->line, "upper constraint needs exactly one 'upper:' clause");
        spec.bound = UpperBound{bound_expr(doc, *e, upper_src, env)};
        this_stage = 2;
      } else {
        fail(doc, e->line, "constraint kind must be funnel, lower, or upper");
      }
      if (this_stage < stage)
        fail(doc, e->line, "constraints must be ordered: funnels, then lower, then upper");
      stage = this_stage;
      specs.push_back(std::move(spec));
    }
    if (specs.empty())
      throw ScenarioParseError(doc.display + ": [constraints] must define at least one constraint");
    s.constraints = ConstraintSet(n, std::move(specs));
  }

  // [consolidation]
  check_known_keys(doc, "consolidation", {"nu"});
  const Entry& nu_e = need(doc, "consolidation", "nu");
  s.nu = number(doc, nu_e);
  if (!(s.nu > 0) || !std::isfinite(s.nu)) fail(doc, nu_e.line, "nu must be positive and finite");

  // [bound]
  check_known_keys(doc, "bound",
                   {"policy", "T", "beta", "rho0", "rho_inf", "mu", "k_alpha", "eps_g", "mu_chi"});
  const Entry& policy = need(doc, "bound", "policy");
  FiniteTimeBoundParams ftb;
  ftb.T = number(doc, need(doc, "bound", "T"));
  ftb.beta = number(doc, need(doc, "bound", "beta"));
  ftb.rho0 = number_or_auto(doc, need(doc, "bound", "rho0"));
  ftb.rho_inf = number(doc, need(doc, "bound", "rho_inf"));
  if (!(ftb.T > 0)) fail(doc, policy.line, "T must be positive");
  if (!(ftb.beta > 0 && ftb.beta < 1)) fail(doc, policy.line, "beta must lie in (0,1)");
  if (!std::isnan(ftb.rho0) && !(ftb.rho0 <= ftb.rho_inf))
    fail(doc, policy.line, "rho0 must not exceed rho_inf");
  bool adaptive = false;
  if (policy.value == "static") {
    for (const char* k : {"mu", "k_alpha", "eps_g", "mu_chi"})
      if (find_unique(doc, "bound", k))
        fail(doc, policy.line, std::string("'") + k + "' applies to the adaptive policy only");
    s.bound = StaticBound{ftb};
  } else if (policy.value == "adaptive") {
    adaptive = true;
    AdaptiveBound ab;
    ab.nominal = ftb;
    ab.mu = number(doc, need(doc, "bound", "mu"));
    ab.estimator.k_alpha = number(doc, need(doc, "bound", "k_alpha"));
    ab.estimator.eps_g = number(doc, need(doc, "bound", "eps_g"));
    ab.estimator.mu_chi = number(doc, need(doc, "bound", "mu_chi"));
    if (!(ab.mu > 0)) fail(doc, policy.line, "mu must be positive");
    if (!(ab.estimator.k_alpha > 0) || !(ab.estimator.eps_g > 0) || !(ab.estimator.mu_chi > 0))
      fail(doc, policy.line, "estimator gains k_alpha, eps_g, mu_chi must be positive");
    s.bound = ab;
  } else {
    fail(doc, policy.line, "bound policy must be 'static' or 'adaptive'");
  }

  // [controller]
  check_known_keys(doc, "controller", {"upsilon", "k", "theta_inf", "l", "theta0"});
  ControllerConfig cc;
  cc.r = r;
  cc.n = n;
  cc.nu = s.nu;
  cc.upsilon = number(doc, need(doc, "controller", "upsilon"));
  const Entry& gains = need(doc, "controller", "k");
  {
    const auto k = number_list(doc, gains);
    if (static_cast<int>(k.size()) != r)
      fail(doc, gains.line,
           "k must list exactly r = " + std::to_string(r) + " gains, got " +
               std::to_string(k.size()));
    for (double v : k)
      if (!(v > 0)) fail(doc, gains.line, "controller gains must be positive");
    cc.k = k;
  }
  if (!(cc.upsilon > 0)) fail(doc, need(doc, "controller", "upsilon").line, "upsilon must be positive");
  if (r >= 2) {
    PerfFunnelParams pf;
    const Entry& ti = need(doc, "controller", "theta_inf");
    pf.theta_inf = number(doc, ti);
    pf.l = number(doc, need(doc, "controller", "l"));
    pf.theta0 = number_or_auto(doc, need(doc, "controller", "theta0"));
    if (!(pf.theta_inf > 0)) fail(doc, ti.line, "theta_inf must be positive");
    if (!(pf.l >= 0)) fail(doc, ti.line, "l must be nonnegative");
    if (!std::isnan(pf.theta0) && !(pf.theta0 >= pf.theta_inf))
      fail(doc, ti.line, "theta0 must not fall below theta_inf");
    cc.funnels.assign(r - 1, std::vector<PerfFunnelParams>(n, pf));
  } else {
    for (const char* k : {"theta_inf", "l", "theta0"})
      if (const Entry* e = find_unique(doc, "controller", k))
        fail(doc, e->line, std::string("'") + k + "' needs r >= 2 (no intermediate errors)");
  }
  s.controller = cc;

  // [integration]
  check_known_keys(doc, "integration", {"step", "horizon", "stride"});
  s.integration.step = number(doc, need(doc, "integration", "step"));
  s.integration.horizon = number(doc, need(doc, "integration", "horizon"));
  if (const Entry* e = find_unique(doc, "integration", "stride"))
    s.integration.record_stride = integer(doc, *e);
  if (!(s.integration.step > 0))
    fail(doc, need(doc, "integration", "step").line, "step must be positive");
  if (!(s.integration.horizon > s.integration.step))
    fail(doc, need(doc, "integration", "horizon").line, "horizon must exceed the step");
  if (s.integration.record_stride < 1)
    fail(doc, find_unique(doc, "integration", "stride")->line, "stride must be at least 1");

  // [initial]
  check_known_keys(doc, "initial", {"x0", "theta0", "x_tilde0"});
  const Entry& x0e = need(doc, "initial", "x0");
  {
    const auto v = number_list(doc, x0e);
    if (static_cast<int>(v.size()) != n * r)
      fail(doc, x0e.line,
           "x0 must list n*r = " + std::to_string(n * r) + " values, got " +
               std::to_string(v.size()));
    s.x0 = Eigen::Map<const Vec>(v.data(), v.size());
  }
  if (const Entry* e = find_unique(doc, "initial", "theta0")) {
    if (!robot) fail(doc, e->line, "theta0 is only meaningful for the robot plant");
    s.theta0 = number(doc, *e);
  }
  if (const Entry* e = find_unique(doc, "initial", "x_tilde0")) {
    if (!adaptive) fail(doc, e->line, "x_tilde0 needs the adaptive bound policy");
    auto& ab = std::get<AdaptiveBound>(s.bound);
    if (e->value == "same") {
      ab.estimator.x_tilde0 = s.x0.head(n);
    } else {
      const auto v = number_list(doc, *e);
      if (static_cast<int>(v.size()) != n)
        fail(doc, e->line, "x_tilde0 must list n = " + std::to_string(n) + " values");
      ab.estimator.x_tilde0 = Eigen::Map<const Vec>(v.data(), v.size());
    }
  } else if (adaptive) {
    std::get<AdaptiveBound>(s.bound).estimator.x_tilde0 = s.x0.head(n);
  }

  // [oracle]
  check_known_keys(doc, "oracle", {"box", "resolution", "polish_steps", "polish_rate"});
  if (const Entry* e = find_unique(doc, "oracle", "box")) {
    const auto v = number_list(doc, *e);
    if (static_cast<int>(v.size()) != 2 * n)
      fail(doc, e->line, "box must list 2n = " + std::to_string(2 * n) + " values (lo hi per axis)");
    s.roi.box.clear();
    for (int d = 0; d < n; ++d) {
      if (!(v[2 * d] < v[2 * d + 1])) fail(doc, e->line, "box sides must satisfy lo < hi");
      s.roi.box.emplace_back(v[2 * d], v[2 * d + 1]);
    }
  } else if (!have_roi_default) {
    s.roi.box.clear();  // no search region; oracle-backed commands will refuse
  }
  if (const Entry* e = find_unique(doc, "oracle", "resolution")) {
    s.roi.resolution = integer(doc, *e);
    if (s.roi.resolution < 2) fail(doc, e->line, "resolution must be at least 2");
  }
  if (const Entry* e = find_unique(doc, "oracle", "polish_steps")) {
    s.roi.polish_steps = integer(doc, *e);
    if (s.roi.polish_steps < 0) fail(doc, e->line, "polish_steps must be nonnegative");
  }
  if (const Entry* e = find_unique(doc, "oracle", "polish_rate"))
    s.roi.polish_rate = number(doc, *e);

  // Unknown sections.
  for (const Entry& e : doc.entries) {
    static const char* known[] = {"plant",      "params",      "constraints", "consolidation",
                                  "bound",      "controller",  "integration", "initial",
                                  "oracle"};
    bool ok = false;
    for (const char* k : known) ok = ok || e.section == k;
    if (!ok) fail(doc, e.line, "unknown section [" + e.section + "]");
  }

  // Funnel well-definedness over the horizon: fatal under a static bound,
  // expected (and flagged) under the adaptive one.
  {
    int k = 0;
    for (const auto& spec : s.constraints.specs()) {
      ++k;
      const auto* fb = std::get_if<FunnelBound>(&spec.bound);
      if (!fb) continue;
      for (int j = 0; j < 1000; ++j) {
        const double t = s.integration.horizon * j / 999.0;
        const double width = fb->upper.value(t) - fb->lower.value(t);
        if (width >= 1e-6) continue;
        std::ostringstream msg;
        msg << "funnel on channel " << spec.channel.name << " collapses near t = " << t
            << " (width " << width << ")";
        if (!adaptive)
          throw ScenarioParseError(doc.display + ": " + msg.str() +
                                   "; a static bound cannot survive an empty constraint set");
        load.warnings.push_back(msg.str());
        break;
      }
    }
  }

  // Start-side check of the consolidating bound when it is fully resolved.
  if (!adaptive && !std::isnan(ftb.rho0)) {
    const Consolidation cons(s.constraints, s.nu);
    const double a0 = alpha(cons, 0.0, Vec(s.x0.head(n)));
    if (!(a0 > ftb.rho0))
      throw InitialBoundViolation("alpha(0, x1(0)) = " + std::to_string(a0) +
                                  " does not exceed rho0 = " + std::to_string(ftb.rho0));
  }

  for (const Entry& e : doc.entries) s.doc.emplace_back(e.section, e.key, e.value);
  return load;
}

ScenarioLoad parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError(path + ": cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

std::string emit_scenario(const Scenario& s) {
  std::string out;
  std::string current;
  bool first = true;
  for (const auto& [section, key, value] : s.doc) {
    if (section != current) {
      if (!first) out += "\n";
      out += "[" + section + "]\n";
      current = section;
      first = false;
    }
    out += key + " = " + value + "\n";
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string trace_csv(const SimulationTrace& tr) {
  std::ostringstream out;
  const int n = tr.n, r = tr.r;
  out << "t";
  for (int i = 1; i <= n * r; ++i) out << ",x" << i;
  if (tr.has_theta) out << ",theta";
  for (int i = 1; i <= n; ++i) out << ",u" << i;
  out << ",alpha,alpha_bar,rho_alpha";
  if (tr.has_estimator) {
    out << ",varrho,alpha_hat";
    for (int i = 1; i <= n; ++i) out << ",xt" << i;
  }
  out << ",e_alpha,eps_alpha";
  for (int level = 2; level <= r; ++level)
    for (int j = 1; j <= n; ++j) out << ",e_hat_" << level << "_" << j;
  out << ",event\n";

  for (size_t k = 0; k < tr.t.size(); ++k) {
    out << format_double(tr.t[k]);
    for (int i = 0; i < n * r; ++i) out << "," << format_double(tr.x[k][i]);
    if (tr.has_theta) out << "," << format_double(tr.theta[k]);
    for (int i = 0; i < n; ++i) out << "," << format_double(tr.u[k][i]);
    out << "," << format_double(tr.alpha[k]) << "," << format_double(tr.alpha_bar[k]) << ","
        << format_double(tr.rho_alpha[k]);
    if (tr.has_estimator) {
      out << "," << format_double(tr.varrho[k]) << "," << format_double(tr.alpha_hat[k]);
      for (int i = 0; i < n; ++i) out << "," << format_double(tr.x_tilde[k][i]);
    }
    out << "," << format_double(tr.e_alpha[k]) << "," << format_double(tr.eps_alpha[k]);
    for (int i = 0; i < n * (r - 1); ++i) out << "," << format_double(tr.e_hat[k][i]);
    out << "," << csv_field(tr.event[k]) << "\n";
  }
  return out.str();
}

SimulationTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError(path + ": cannot open trace csv");
  std::string line;
  if (!std::getline(in, line)) throw ScenarioParseError(path + ": empty trace csv");
  const auto header = csv_split(line);

  SimulationTrace tr;
  int xs = 0, us = 0;
  for (const std::string& h : header) {
    if (h.size() > 1 && h[0] == 'x' && std::isdigit(static_cast<unsigned char>(h[1]))) ++xs;
    if (h.size() > 1 && h[0] == 'u' && std::isdigit(static_cast<unsigned char>(h[1]))) ++us;
    if (h == "theta") tr.has_theta = true;
    if (h == "alpha_hat") tr.has_estimator = true;
  }
  if (us == 0 || xs == 0 || xs % us != 0)
    throw ScenarioParseError(path + ": trace header has inconsistent state/input columns");
  tr.n = us;
  tr.r = xs / us;

  size_t expected = header.size();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv_split(line);
    if (f.size() != expected)
      throw ScenarioParseError(path + ": row has " + std::to_string(f.size()) +
                               " fields, expected " + std::to_string(expected));
    size_t c = 0;
    const auto next = [&]() {
      const size_t i = c++;
      return csv_number(f[i], "column " + header[i]);
    };
    tr.t.push_back(next());
    Vec x(tr.n * tr.r);
    for (int i = 0; i < tr.n * tr.r; ++i) x[i] = next();
    tr.x.push_back(std::move(x));
    if (tr.has_theta) tr.theta.push_back(next());
    Vec u(tr.n);
    for (int i = 0; i < tr.n; ++i) u[i] = next();
    tr.u.push_back(std::move(u));
    tr.alpha.push_back(next());
    tr.alpha_bar.push_back(next());
    tr.rho_alpha.push_back(next());
    if (tr.has_estimator) {
      tr.varrho.push_back(next());
      tr.alpha_hat.push_back(next());
      Vec xt(tr.n);
      for (int i = 0; i < tr.n; ++i) xt[i] = next();
      tr.x_tilde.push_back(std::move(xt));
    }
    tr.e_alpha.push_back(next());
    tr.eps_alpha.push_back(next());
    Vec eh(tr.n * (tr.r - 1));
    for (int i = 0; i < tr.n * (tr.r - 1); ++i) eh[i] = next();
    tr.e_hat.push_back(std::move(eh));
    tr.event.push_back(f[expected - 1]);
  }
  return tr;
}

void emit_trace(const SimulationTrace& tr, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(dir + ": cannot create output directory: " + ec.message());

  const auto write_file = [&](const std::string& name, const std::string& content) {
    const fs::path p = fs::path(dir) / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error(p.string() + ": write failed");
  };

  write_file("trace.csv", trace_csv(tr));

  json meta;
  meta["scenario"] = tr.meta.scenario_name;
  meta["step"] = tr.meta.step;
  meta["horizon"] = tr.meta.horizon;
  meta["record_stride"] = tr.meta.record_stride;
  meta["adaptive"] = tr.meta.adaptive;
  meta["rho0_resolved"] = tr.meta.rho0_resolved;
  meta["theta0_resolved"] = tr.meta.theta0_resolved;
  meta["fd_channels"] = tr.meta.fd_channels;
  meta["rows"] = tr.t.size();
  meta["aborted"] = tr.meta.aborted;
  if (tr.meta.aborted) {
    meta["abort_time"] = tr.meta.abort_time;
    meta["abort_reason"] = tr.meta.abort_reason;
  }
  write_file("meta.json", meta.dump(2) + "\n");

  std::ostringstream ev;
  for (const TraceEvent& e : tr.events)
    ev << format_double(e.t) << "\t" << e.kind << "\t" << e.detail << "\n";
  write_file("events.log", ev.str());
}

std::string oracle_csv(const std::vector<OracleSample>& samples) {
  std::ostringstream out;
  const int n = samples.empty() ? 0 : static_cast<int>(samples.front().res.argmax.size());
  out << "t,alpha_star,alpha_bar_star";
  for (int i = 1; i <= n; ++i) out << ",argmax" << i;
  out << ",on_boundary\n";
  for (const OracleSample& s : samples) {
    out << format_double(s.t) << "," << format_double(s.res.alpha_star) << ","
        << format_double(s.res.alpha_bar_star);
    for (int i = 0; i < n; ++i) out << "," << format_double(s.res.argmax[i]);
    out << "," << (s.res.on_boundary ? 1 : 0) << "\n";
  }
  return out.str();
}

void write_oracle_csv(const std::vector<OracleSample>& samples, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  out << oracle_csv(samples);
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::vector<std::pair<double, double>> read_oracle_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError(path + ": cannot open oracle csv");
  std::string line;
  if (!std::getline(in, line)) throw ScenarioParseError(path + ": empty oracle csv");
  std::vector<std::pair<double, double>> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv_split(line);
    if (f.size() < 2) throw ScenarioParseError(path + ": oracle csv row too short");
    out.emplace_back(csv_number(f[0], "t"), csv_number(f[1], "alpha_star"));
  }
  return out;
}

}  // namespace cfc
