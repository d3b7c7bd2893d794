#pragma once

#include "surftopo/analytic.hpp"
#include "surftopo/nbuffer.hpp"
#include "surftopo/surface.hpp"
#include "surftopo/tool.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace surftopo::cli {

// Flat `section.key = value` text. `#` starts a comment; blank lines are
// ignored. Later assignments override earlier ones.
class ConfigMap {
 public:
  static ConfigMap parse(std::istream& in, const std::string& source = "<config>");
  static ConfigMap load(const std::filesystem::path& path);

  // `key=value` override, as given to --set.
  void assign(const std::string& assignment);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  std::optional<double> optional_number(const std::string& key) const;
  long integer(const std::string& key, long fallback) const;
  std::vector<double> number_list(const std::string& key, const std::vector<double>& fallback) const;

  // Throws ConfigError naming the first key not in `known`.
  void check_keys(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
  std::string source_ = "<config>";
};

enum class JobKind { kTrajectory, kPlanePasses, kHyparRules };

struct RunConfig {
  ToolDefinition tool;
  std::string mesh_path;
  double mesh_chord_mm = 1e-4;
  double spindle_rpm = 14800.0;
  double dalpha_deg = 1.0;

  NominalSurface surface = NominalSurface::plane(0.0);
  GridBounds bounds{0.0, 3.0, 0.0, 3.0};
  std::size_t nx = 256;
  std::size_t ny = 256;
  double stock_mm = 0.05;

  SimulationMode mode;
  unsigned threads = 1;

  JobKind job = JobKind::kPlanePasses;
  std::string trajectory_path;
  double yaw_deg = 0.0;
  double tilt_deg = 1.0;
  std::optional<double> stepover_mm;
  double hc_mm = 0.005;
  double vf_m_per_min = 2.0;
  std::optional<double> fz_mm;
  double window_mm = 3.0;
  // hypar_rules
  double rule_x_mm = 0.0;
  double rule_y_from_mm = -20.0;
  double rule_y_to_mm = 20.0;
  double posture_step_mm = 0.5;
  std::optional<double> slow_vf_m_per_min;  // trapezoidal dip when set
  std::size_t rule_count = 1;

  RadiusFormula radius_formula = RadiusFormula::kSinSquaredYaw;
  SzBranch sz_branch = SzBranch::kAsPrinted;
  double sal_threshold = 0.2;

  std::array<std::vector<double>, kFactorCount> doe_levels{
      std::vector<double>{0.0, 20.0, 40.0}, std::vector<double>{1.0, 10.0},
      std::vector<double>{0.005, 0.01}, std::vector<double>{2.0, 4.0}};

  std::string out_dir = "out";

  // Throws ConfigError on unknown keys or invalid values.
  static RunConfig from_map(const ConfigMap& map);
  // Keys understood by from_map.
  static const std::vector<std::string>& known_keys();
};

RadiusFormula parse_radius_formula(const std::string& s);
SzBranch parse_sz_branch(const std::string& s);
std::string to_string(RadiusFormula v);
std::string to_string(SzBranch b);

}  // namespace surftopo::cli
