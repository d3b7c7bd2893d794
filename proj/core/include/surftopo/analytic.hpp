#pragma once

#include "surftopo/tool.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace surftopo {

// Cutting conditions of one plane experiment. Angles in degrees, lengths
// in mm, feedrate in m/min.
struct MachiningParams {
  double theta_n_deg = 0.0;
  double theta_t_deg = 1.0;
  double h_c = 0.005;
  double f_z = 0.14;
  double v_f = 2.0;
  std::optional<double> stepover;  // overrides the h_c derived value

  // Throws DomainError when an invariant fails.
  void validate() const;
};

enum class SzBranch {
  kAsPrinted,  // feed term alone when r > sqrt(8 hc Req)
  kHcAdditiveSwapped,    // scallop added when r > sqrt(8 hc Req)
};

// Maximum height estimate, mm. Throws DomainError for non-positive input.
double predict_sz(double f_z, double h_c, double r_eq, double r,
                  SzBranch branch = SzBranch::kAsPrinted);

// Transversal step for scallop height h_c on a circle of radius r_eq
// (small-sagitta form), mm. Throws DomainError unless 0 < h_c < r_eq.
double stepover_from_scallop(double h_c, double r_eq);

struct ErrorStats {
  double mean_abs_error = 0.0;
  double std_dev = 0.0;  // population standard deviation of |a - s|
};
ErrorStats analytic_vs_sim_error(std::span<const double> analytic, std::span<const double> simulated);

enum class Factor { kYaw = 0, kTilt = 1, kScallop = 2, kFeedrate = 3 };
inline constexpr std::size_t kFactorCount = 4;

struct DesignRow {
  std::array<double, kFactorCount> levels{};  // yaw_deg, tilt_deg, hc_mm, vf_m_per_min
  std::vector<double> responses;
};

// Factorial design with named response columns.
struct DesignTable {
  std::vector<std::string> response_names;
  std::vector<DesignRow> rows;

  // Column of one response; throws DomainError for an unknown name.
  std::vector<double> column(const std::string& name) const;
};

// Full factorial over the given levels (yaw-major order), no responses.
DesignTable full_factorial(const std::array<std::vector<double>, kFactorCount>& levels);

struct ParameterEffects {
  std::string name;
  double mean = 0.0;
  std::array<double, kFactorCount> effects{};
};

struct EffectTable {
  std::vector<ParameterEffects> rows;

  // mean + sum_j effect_j x_j, with x = -1 / +1 at a factor's lowest /
  // highest level and 0 at a middle level.
  double fitted(const DesignTable& design, std::size_t row, std::size_t response) const;
};

// Main effects, (mean at high level - mean at low level) / 2 per factor.
// Three-level factors use their extreme levels. Throws DomainError when
// the design is not a balanced full factorial.
EffectTable factor_effects(const DesignTable& design);

// CSV `yaw_deg,tilt_deg,hc_mm,vf_m_per_min,<responses...>`; `undef(...)` and
// `nan` cells read as NaN.
DesignTable read_design_csv(std::istream& in, const std::string& source = "<stream>");
DesignTable read_design_csv(const std::filesystem::path& path);
void write_design_csv(const DesignTable& design, std::ostream& out);

// One row per parameter: `parameter,mean,yaw,tilt,scallop_height,feedrate`.
void write_effect_table(const EffectTable& table, std::ostream& out);

}  // namespace surftopo
