#include "surftopo_cli/config.hpp"

#include "surftopo/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace surftopo::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& v) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

ConfigMap ConfigMap::parse(std::istream& in, const std::string& source) {
  ConfigMap map;
  map.source_ = source;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    map.values_[key] = trim(line.substr(eq + 1));
  }
  return map;
}

ConfigMap ConfigMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  return parse(in, path.string());
}

void ConfigMap::assign(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || trim(assignment.substr(0, eq)).empty()) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::string ConfigMap::text(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigMap::number(const std::string& key, double fallback) const {
  return optional_number(key).value_or(fallback);
}

std::optional<double> ConfigMap::optional_number(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  double v = 0.0;
  if (!parse_double(it->second, v)) {
    throw ConfigError(source_ + ": key '" + key + "' expects a number, got '" + it->second + "'");
  }
  return v;
}

long ConfigMap::integer(const std::string& key, long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  long v = 0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(source_ + ": key '" + key + "' expects an integer, got '" + s + "'");
  }
  return v;
}

std::vector<double> ConfigMap::number_list(const std::string& key,
                                           const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  std::istringstream is(it->second);
  std::string cell;
  while (std::getline(is, cell, ',')) {
    double v = 0.0;
    if (!parse_double(trim(cell), v)) {
      throw ConfigError(source_ + ": key '" + key + "' expects a comma separated list of numbers");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(source_ + ": key '" + key + "' is an empty list");
  return out;
}

void ConfigMap::check_keys(const std::vector<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(source_ + ": unknown key '" + key + "'");
    }
  }
}

RadiusFormula parse_radius_formula(const std::string& s) {
  if (s == "as_printed") return RadiusFormula::kAsPrinted;
  if (s == "sin_squared_yaw") return RadiusFormula::kSinSquaredYaw;
  throw ConfigError("model.eq8_variant must be as_printed or sin_squared_yaw, got '" + s + "'");
}

SzBranch parse_sz_branch(const std::string& s) {
  if (s == "as_printed") return SzBranch::kAsPrinted;
  if (s == "hc_additive_swapped") return SzBranch::kHcAdditiveSwapped;
  throw ConfigError("model.sz_branch must be as_printed or hc_additive_swapped, got '" + s + "'");
}

std::string to_string(RadiusFormula v) { return v == RadiusFormula::kAsPrinted ? "as_printed" : "sin_squared_yaw"; }
std::string to_string(SzBranch b) { return b == SzBranch::kAsPrinted ? "as_printed" : "hc_additive_swapped"; }

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys{
      "tool.R_mm", "tool.r_mm", "tool.teeth", "tool.flute_height_mm", "tool.mesh_path",
      "tool.mesh_chord_mm", "spindle.rpm", "sampling.dalpha_deg", "surface.kind", "surface.z0_mm",
      "surface.k_mm", "grid.xmin_mm", "grid.xmax_mm", "grid.ymin_mm", "grid.ymax_mm", "grid.nx",
      "grid.ny", "grid.stock_mm", "sim.mode", "sim.cull_radius_mm", "sim.window_overlap",
      "sim.threads", "job.kind", "job.trajectory_path", "job.yaw_deg", "job.tilt_deg",
      "job.stepover_mm", "job.hc_mm", "job.vf_m_per_min", "job.fz_mm", "job.window_mm",
      "job.rule_x_mm", "job.rule_y_from_mm", "job.rule_y_to_mm", "job.posture_step_mm",
      "job.slow_vf_m_per_min", "job.rule_count", "model.eq8_variant", "model.sz_branch",
      "areal.sal_threshold", "doe.yaw_deg", "doe.tilt_deg", "doe.hc_mm", "doe.vf_m_per_min",
      "output.dir"};
  return keys;
}

RunConfig RunConfig::from_map(const ConfigMap& m) {
  m.check_keys(known_keys());
  RunConfig c;
  c.tool.R = m.number("tool.R_mm", 5.0);
  c.tool.r = m.number("tool.r_mm", 1.5);
  c.tool.tooth_count = static_cast<int>(m.integer("tool.teeth", 1));
  c.tool.flute_height = m.number("tool.flute_height_mm", 2.0 * c.tool.R);
  c.mesh_path = m.text("tool.mesh_path", "");
  c.mesh_chord_mm = m.number("tool.mesh_chord_mm", 1e-4);
  try {
    c.tool.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  c.spindle_rpm = m.number("spindle.rpm", 14800.0);
  if (!(c.spindle_rpm > 0.0)) throw ConfigError("spindle.rpm must be positive");
  c.dalpha_deg = m.number("sampling.dalpha_deg", 1.0);
  if (!(c.dalpha_deg > 0.0 && c.dalpha_deg <= 360.0)) {
    throw ConfigError("sampling.dalpha_deg must lie in (0, 360]");
  }

  const std::string kind = m.text("surface.kind", "plane");
  if (kind == "plane") {
    c.surface = NominalSurface::plane(m.number("surface.z0_mm", 0.0));
  } else if (kind == "hypar") {
    const double k = m.number("surface.k_mm", 50.0);
    if (!(k != 0.0)) throw ConfigError("surface.k_mm must be non-zero");
    c.surface = NominalSurface::hypar(k);
  } else {
    throw ConfigError("surface.kind must be plane or hypar, got '" + kind + "'");
  }
  c.bounds.xmin = m.number("grid.xmin_mm", 0.0);
  c.bounds.xmax = m.number("grid.xmax_mm", 3.0);
  c.bounds.ymin = m.number("grid.ymin_mm", 0.0);
  c.bounds.ymax = m.number("grid.ymax_mm", 3.0);
  if (!(c.bounds.xmax > c.bounds.xmin) || !(c.bounds.ymax > c.bounds.ymin)) {
    throw ConfigError("grid bounds must satisfy min < max");
  }
  const long nx = m.integer("grid.nx", 256);
  const long ny = m.integer("grid.ny", 256);
  if (nx < 3 || ny < 3 || nx > 16384 || ny > 16384) throw ConfigError("grid.nx and grid.ny must lie in [3, 16384]");
  c.nx = static_cast<std::size_t>(nx);
  c.ny = static_cast<std::size_t>(ny);
  c.stock_mm = m.number("grid.stock_mm", 0.05);
  if (!(c.stock_mm > 0.0)) throw ConfigError("grid.stock_mm must be positive");

  const std::string mode = m.text("sim.mode", "tooth_gated");
  if (mode == "tooth_gated") {
    c.mode = SimulationMode::tooth_gated();
  } else if (mode == "envelope") {
    c.mode = SimulationMode::envelope();
  } else {
    throw ConfigError("sim.mode must be tooth_gated or envelope, got '" + mode + "'");
  }
  c.mode.cull_radius = m.number("sim.cull_radius_mm", 0.0);
  c.mode.window_overlap = m.number("sim.window_overlap", 1.0);
  if (!(c.mode.window_overlap >= 0.0)) throw ConfigError("sim.window_overlap must be >= 0");
  const long threads = m.integer("sim.threads", 1);
  if (threads < 1 || threads > 1024) throw ConfigError("sim.threads must lie in [1, 1024]");
  c.threads = static_cast<unsigned>(threads);

  const std::string job = m.text("job.kind", "plane_passes");
  if (job == "trajectory") {
    c.job = JobKind::kTrajectory;
  } else if (job == "plane_passes") {
    c.job = JobKind::kPlanePasses;
  } else if (job == "hypar_rules") {
    c.job = JobKind::kHyparRules;
  } else {
    throw ConfigError("job.kind must be trajectory, plane_passes or hypar_rules, got '" + job + "'");
  }
  c.trajectory_path = m.text("job.trajectory_path", "");
  if (c.job == JobKind::kTrajectory && c.trajectory_path.empty()) {
    throw ConfigError("job.kind = trajectory requires job.trajectory_path");
  }
  if (c.job == JobKind::kHyparRules && c.surface.kind != NominalSurface::Kind::kHyperbolicParaboloid) {
    throw ConfigError("job.kind = hypar_rules requires surface.kind = hypar");
  }
  if (c.job == JobKind::kPlanePasses && c.surface.kind != NominalSurface::Kind::kPlane) {
    throw ConfigError("job.kind = plane_passes requires surface.kind = plane");
  }
  c.yaw_deg = m.number("job.yaw_deg", 0.0);
  c.tilt_deg = m.number("job.tilt_deg", 1.0);
  if (!(std::abs(c.yaw_deg) < 90.0)) throw ConfigError("job.yaw_deg must lie in (-90, 90)");
  if (!(c.tilt_deg >= 0.0 && c.tilt_deg < 90.0)) throw ConfigError("job.tilt_deg must lie in [0, 90)");
  c.stepover_mm = m.optional_number("job.stepover_mm");
  if (c.stepover_mm && !(*c.stepover_mm > 0.0)) throw ConfigError("job.stepover_mm must be positive");
  c.hc_mm = m.number("job.hc_mm", 0.005);
  if (!(c.hc_mm > 0.0)) throw ConfigError("job.hc_mm must be positive");
  c.vf_m_per_min = m.number("job.vf_m_per_min", 2.0);
  if (!(c.vf_m_per_min > 0.0)) throw ConfigError("job.vf_m_per_min must be positive");
  c.fz_mm = m.optional_number("job.fz_mm");
  if (c.fz_mm && !(*c.fz_mm > 0.0)) throw ConfigError("job.fz_mm must be positive");
  c.window_mm = m.number("job.window_mm", 3.0);
  if (!(c.window_mm > 0.0)) throw ConfigError("job.window_mm must be positive");
  c.rule_x_mm = m.number("job.rule_x_mm", 0.0);
  c.rule_y_from_mm = m.number("job.rule_y_from_mm", -20.0);
  c.rule_y_to_mm = m.number("job.rule_y_to_mm", 20.0);
  if (!(c.rule_y_to_mm > c.rule_y_from_mm)) throw ConfigError("job.rule_y_to_mm must exceed job.rule_y_from_mm");
  c.posture_step_mm = m.number("job.posture_step_mm", 0.5);
  if (!(c.posture_step_mm > 0.0)) throw ConfigError("job.posture_step_mm must be positive");
  c.slow_vf_m_per_min = m.optional_number("job.slow_vf_m_per_min");
  if (c.slow_vf_m_per_min && !(*c.slow_vf_m_per_min > 0.0)) {
    throw ConfigError("job.slow_vf_m_per_min must be positive");
  }
  const long rules = m.integer("job.rule_count", 1);
  if (rules < 1 || rules > 10000) throw ConfigError("job.rule_count must lie in [1, 10000]");
  c.rule_count = static_cast<std::size_t>(rules);

  c.radius_formula = parse_radius_formula(m.text("model.eq8_variant", "sin_squared_yaw"));
  c.sz_branch = parse_sz_branch(m.text("model.sz_branch", "as_printed"));
  c.sal_threshold = m.number("areal.sal_threshold", 0.2);
  if (!(c.sal_threshold > 0.0 && c.sal_threshold < 1.0)) {
    throw ConfigError("areal.sal_threshold must lie in (0, 1)");
  }
  const std::array<const char*, kFactorCount> doe_keys{"doe.yaw_deg", "doe.tilt_deg", "doe.hc_mm",
                                                      "doe.vf_m_per_min"};
  for (std::size_t f = 0; f < kFactorCount; ++f) c.doe_levels[f] = m.number_list(doe_keys[f], c.doe_levels[f]);
  c.out_dir = m.text("output.dir", "out");
  return c;
}

}  // namespace surftopo::cli
