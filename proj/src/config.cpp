#include "perfhom/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace perfhom {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// accepts plain reals and exact fractions like "1/64"
double parse_real(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  const auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      const double num = std::stod(s.substr(0, slash));
      const double den = std::stod(s.substr(slash + 1));
      if (den == 0.0) throw ConfigError("division by zero in value for " + key);
      return num / den;
    }
    return std::stod(s);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse numeric value '" + s + "' for key " + key);
  }
}

int parse_int(const std::string& raw, const std::string& key) {
  try {
    return std::stoi(trim(raw));
  } catch (const std::exception&) {
    throw ConfigError("cannot parse integer value '" + raw + "' for key " + key);
  }
}

std::vector<double> parse_real_list(const std::string& raw, const std::string& key) {
  std::vector<double> out;
  std::istringstream is(raw);
  std::string tok;
  while (is >> tok) out.push_back(parse_real(tok, key));
  return out;
}

Vec2 parse_vec2(const std::string& raw, const std::string& key) {
  const auto vals = parse_real_list(raw, key);
  if (vals.size() != 2) throw ConfigError("key " + key + " expects two numbers");
  return {vals[0], vals[1]};
}

}  // namespace

const char* study_kind_name(StudyKind k) {
  switch (k) {
    case StudyKind::cell: return "cell";
    case StudyKind::epsilon_run: return "epsilon_run";
    case StudyKind::homogenized_run: return "homogenized_run";
    case StudyKind::convergence: return "convergence";
    case StudyKind::properties: return "properties";
  }
  return "unknown";
}

RunConfig parse_config(std::istream& is) {
  RunConfig cfg;
  std::string section;
  std::string line;
  std::string hole_shape = "disc";
  bool hole_set = false;
  int line_no = 0;

  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("malformed section header: " + t);
      section = t.substr(1, t.size() - 2);
      if (section != "geometry" && section != "discretization" && section != "problem" &&
          section != "study" && section != "output")
        throw ConfigError("unknown config section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(line_no));
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));

    if (section == "geometry") {
      if (key == "omega") {
        const auto v = parse_real_list(val, key);
        if (v.size() != 4) throw ConfigError("omega expects x0 y0 x1 y1");
        cfg.omega = {v[0], v[1], v[2], v[3]};
      } else if (key == "hole") {
        hole_shape = val;
        hole_set = true;
      } else if (key == "radius") {
        cfg.hole.radius = parse_real(val, key);
      } else if (key == "half_width") {
        cfg.hole.half_width = parse_real(val, key);
      } else if (key == "semi_axes") {
        cfg.hole.semi_axes = parse_vec2(val, key);
      } else if (key == "center") {
        cfg.hole.center = parse_vec2(val, key);
      } else if (key == "polygon_segments") {
        cfg.hole.polygon_segments = parse_int(val, key);
      } else {
        throw ConfigError("unknown key '" + key + "' in [geometry]");
      }
    } else if (section == "discretization") {
      if (key == "h_cell") cfg.h_cell = parse_real(val, key);
      else if (key == "h_omega") cfg.h_omega = parse_real(val, key);
      else if (key == "eps_h_divisor") cfg.eps_h_divisor = parse_real(val, key);
      else if (key == "dt") cfg.dt = parse_real(val, key);
      else if (key == "dt_rule_c") cfg.dt_rule_c = parse_real(val, key);
      else if (key == "cg_tol") cfg.cg_tol = parse_real(val, key);
      else if (key == "cg_tol_cell") cfg.cg_tol_cell = parse_real(val, key);
      else if (key == "fixedpoint_iters") cfg.fixedpoint_iters = parse_int(val, key);
      else if (key == "epsilon_list") cfg.epsilon_list = parse_real_list(val, key);
      else throw ConfigError("unknown key '" + key + "' in [discretization]");
    } else if (section == "problem") {
      if (key == "kappa") cfg.kappa = parse_real(val, key);
      else if (key == "f") cfg.f_kind = val;
      else if (key == "p") cfg.p = parse_real(val, key);
      else if (key == "g") cfg.g_kind = val;
      else if (key == "forcing_h") cfg.h_preset = val;
      else if (key == "forcing_rho") cfg.rho_preset = val;
      else if (key == "initial") cfg.initial_preset = val;
      else if (key == "T") cfg.T_final = parse_real(val, key);
      else throw ConfigError("unknown key '" + key + "' in [problem]");
    } else if (section == "study") {
      if (key == "kind") {
        if (val == "cell") cfg.kind = StudyKind::cell;
        else if (val == "epsilon_run") cfg.kind = StudyKind::epsilon_run;
        else if (val == "homogenized_run") cfg.kind = StudyKind::homogenized_run;
        else if (val == "convergence") cfg.kind = StudyKind::convergence;
        else if (val == "properties") cfg.kind = StudyKind::properties;
        else throw ConfigError("unknown study kind: " + val);
      } else {
        throw ConfigError("unknown key '" + key + "' in [study]");
      }
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = val;
      else throw ConfigError("unknown key '" + key + "' in [output]");
    } else {
      throw ConfigError("key '" + key + "' appears before any section");
    }
  }

  if (hole_set) {
    HoleSpec h = cfg.hole;
    if (hole_shape == "none") {
      cfg.hole = HoleSpec::none();
    } else if (hole_shape == "disc") {
      cfg.hole = HoleSpec::disc(h.center, h.radius > 0 ? h.radius : 0.25, h.polygon_segments);
    } else if (hole_shape == "square") {
      cfg.hole = HoleSpec::square(h.center, h.half_width, h.polygon_segments);
    } else if (hole_shape == "ellipse") {
      cfg.hole = HoleSpec::ellipse(h.center, h.semi_axes, h.polygon_segments);
    } else {
      throw ConfigError("unknown hole shape: " + hole_shape);
    }
  }
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  return parse_config(is);
}

void validate_config(const RunConfig& cfg) {
  if (!(cfg.omega.width() > 0.0 && cfg.omega.height() > 0.0))
    throw ConfigError("omega must be a nondegenerate rectangle");
  if (!(cfg.kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!(cfg.T_final >= 0.0)) throw ConfigError("T must be nonnegative");
  if (!(cfg.h_cell > 0.0 && cfg.h_omega > 0.0 && cfg.eps_h_divisor >= 4.0))
    throw ConfigError("h_cell/h_omega must be positive and eps_h_divisor at least 4");
  if (cfg.dt < 0.0 || (cfg.dt == 0.0 && !(cfg.dt_rule_c > 0.0)))
    throw ConfigError("need dt > 0 or a positive dt_rule_c");
  if (cfg.fixedpoint_iters < 0) throw ConfigError("fixedpoint_iters must be nonnegative");
  if (cfg.f_kind != "linear" && cfg.f_kind != "power")
    throw ConfigError("unknown f nonlinearity: " + cfg.f_kind);
  if (cfg.g_kind != "linear" && cfg.g_kind != "linear_tanh")
    throw ConfigError("unknown g nonlinearity: " + cfg.g_kind);
  if (cfg.f_kind == "power" && (cfg.p < 2.0 || cfg.p > 4.0))
    throw ConfigError("power exponent p must lie in [2, 4]");
  const bool known_h = cfg.h_preset == "smooth" || cfg.h_preset == "zero";
  const bool known_rho = cfg.rho_preset == "smooth" || cfg.rho_preset == "zero";
  const bool known_u0 = cfg.initial_preset == "sinpi" || cfg.initial_preset == "zero";
  if (!known_h) throw ConfigError("unknown forcing_h preset: " + cfg.h_preset);
  if (!known_rho) throw ConfigError("unknown forcing_rho preset: " + cfg.rho_preset);
  if (!known_u0) throw ConfigError("unknown initial preset: " + cfg.initial_preset);

  for (std::size_t i = 0; i + 1 < cfg.epsilon_list.size(); ++i)
    if (!(cfg.epsilon_list[i] > cfg.epsilon_list[i + 1]))
      throw ConfigError("epsilon_list must be strictly decreasing");
  for (double eps : cfg.epsilon_list) {
    if (!(eps > 0.0)) throw ConfigError("epsilon values must be positive");
    const double nx = cfg.omega.width() / eps;
    const double ny = cfg.omega.height() / eps;
    if (std::abs(nx - std::lround(nx)) > 1e-9 || std::abs(ny - std::lround(ny)) > 1e-9)
      throw ConfigError("epsilon " + std::to_string(eps) + " does not tile omega exactly");
  }
}

UnitCell cell_from_config(const RunConfig& cfg) { return make_unit_cell(cfg.hole); }

Nonlinearity nonlinearity_from_config(const RunConfig& cfg) {
  const FKind fk = cfg.f_kind == "linear" ? FKind::linear : FKind::power;
  const GKind gk = cfg.g_kind == "linear" ? GKind::linear : GKind::linear_tanh;
  Nonlinearity nl = make_nonlinearity(fk, cfg.p, gk);
  validate_nonlinearity(nl);
  return nl;
}

ProblemData problem_from_config(const RunConfig& cfg) {
  ProblemData data;
  data.kappa = cfg.kappa;
  data.nonlin = nonlinearity_from_config(cfg);
  data.T_final = cfg.T_final;

  const Rect box = cfg.omega;
  auto sin_bump = [box](Vec2 x) {
    const double sx = (x.x - box.x0) / box.width();
    const double sy = (x.y - box.y0) / box.height();
    return std::sin(kPi * sx) * std::sin(kPi * sy);
  };

  if (cfg.h_preset == "smooth") {
    data.h = [sin_bump](Vec2 x, double t) { return sin_bump(x) * (1.0 + 0.5 * std::cos(2.0 * t)); };
  } else {
    data.h = [](Vec2, double) { return 0.0; };
  }
  if (cfg.rho_preset == "smooth") {
    data.rho = [sin_bump](Vec2 x, double t) { return 0.5 * sin_bump(x) * std::exp(-t); };
  } else {
    data.rho = [](Vec2, double) { return 0.0; };
  }
  if (cfg.initial_preset == "sinpi") {
    data.u0 = [sin_bump](Vec2 x) { return sin_bump(x); };
  } else {
    data.u0 = [](Vec2) { return 0.0; };
  }
  return data;
}

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> kv;
  char buf[120];
  auto put_real = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    kv.emplace_back(key, buf);
  };
  std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g", cfg.omega.x0, cfg.omega.y0,
                cfg.omega.x1, cfg.omega.y1);
  kv.emplace_back("omega", buf);
  switch (cfg.hole.shape) {
    case HoleShape::none: kv.emplace_back("hole", "none"); break;
    case HoleShape::disc: kv.emplace_back("hole", "disc"); put_real("radius", cfg.hole.radius); break;
    case HoleShape::square:
      kv.emplace_back("hole", "square");
      put_real("half_width", cfg.hole.half_width);
      break;
    case HoleShape::ellipse:
      kv.emplace_back("hole", "ellipse");
      std::snprintf(buf, sizeof buf, "%.17g %.17g", cfg.hole.semi_axes.x, cfg.hole.semi_axes.y);
      kv.emplace_back("semi_axes", buf);
      break;
  }
  if (cfg.hole.shape != HoleShape::none) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g", cfg.hole.center.x, cfg.hole.center.y);
    kv.emplace_back("center", buf);
    kv.emplace_back("polygon_segments", std::to_string(cfg.hole.polygon_segments));
  }
  put_real("h_cell", cfg.h_cell);
  put_real("h_omega", cfg.h_omega);
  put_real("eps_h_divisor", cfg.eps_h_divisor);
  put_real("dt", cfg.dt);
  put_real("dt_rule_c", cfg.dt_rule_c);
  put_real("cg_tol", cfg.cg_tol);
  put_real("cg_tol_cell", cfg.cg_tol_cell);
  kv.emplace_back("fixedpoint_iters", std::to_string(cfg.fixedpoint_iters));
  {
    std::string eps;
    for (double e : cfg.epsilon_list) {
      std::snprintf(buf, sizeof buf, "%.17g", e);
      if (!eps.empty()) eps += " ";
      eps += buf;
    }
    kv.emplace_back("epsilon_list", eps);
  }
  put_real("kappa", cfg.kappa);
  kv.emplace_back("f", cfg.f_kind);
  put_real("p", cfg.p);
  kv.emplace_back("g", cfg.g_kind);
  kv.emplace_back("forcing_h", cfg.h_preset);
  kv.emplace_back("forcing_rho", cfg.rho_preset);
  kv.emplace_back("initial", cfg.initial_preset);
  put_real("T", cfg.T_final);
  kv.emplace_back("study", study_kind_name(cfg.kind));
  return kv;
}

}  // namespace perfhom
