#pragma once

#include "surftopo/geometry.hpp"

#include <memory>
#include <optional>

namespace surftopo {

class ToolMesh;

// Filleted-end (bull-nose) cutter. Tool frame: axis along +Z, tip at the
// origin. The solid is a flat bottom disk of radius R - r, a quarter-torus
// fillet of tube radius r and a cylindrical barrel of radius R closed at the
// flute height.
struct ToolDefinition {
  double R = 5.0;            // nominal radius, mm
  double r = 1.5;            // corner radius, mm
  int tooth_count = 1;
  double flute_height = 10.0;  // barrel top, mm (default 2R)
  std::shared_ptr<const ToolMesh> mesh;  // optional measured/tessellated edge geometry

  static ToolDefinition filleted(double R, double r, int tooth_count = 1);

  double flat_radius() const { return R - r; }

  // Throws DomainError when the invariants do not hold.
  void validate() const;
};

// Tool placement: tip position, unit axis and spindle angle in [0, 2pi).
struct ToolState {
  Vec3 tip = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double spindle_angle = 0.0;
};

// Axial height of the cutter surface at radial distance rho from the axis.
double profile_height(double rho, const ToolDefinition& tool);

enum class RadiusFormula {
  kAsPrinted,      // cos^2(yaw) in both denominator terms
  kSinSquaredYaw,  // second denominator term uses sin^2(yaw)
};

// Equivalent cutting radius at the contact point for yaw theta_n and tilt
// theta_t (radians). Throws DomainError outside 0 <= theta_t <= pi/2,
// |theta_n| < pi/2 and SingularOrientationError at zero tilt or when the
// denominator vanishes.
double effective_radius(double theta_n, double theta_t, const ToolDefinition& tool,
                        RadiusFormula variant = RadiusFormula::kAsPrinted);

struct CutterHit {
  double t = 0.0;    // line parameter, mm
  double phi = 0.0;  // azimuth of the hit about the axis, relative to the spindle angle, [0, 2pi)
};

// Hit in the tool frame, with the outward surface normal.
struct LocalHit {
  double t = 0.0;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
};

// Analytic cutter with precomputed constants; the work-horse behind
// line_cutter_intersection.
class FilletedCutter {
 public:
  explicit FilletedCutter(const ToolDefinition& tool);

  // First boundary crossing (t >= 0) of the line p + t d, |d| = 1, with the
  // cutter surface, everything in the tool frame.
  std::optional<LocalHit> intersect_local(const Vec3& p, const Vec3& d) const;

  bool contains_local(const Vec3& p) const;

  double radius() const { return R_; }
  double corner_radius() const { return r_; }
  double flute_height() const { return H_; }

 private:
  double R_;
  double r_;
  double Rm_;
  double H_;
};

// Azimuth of a tool-frame point about the axis, relative to the spindle angle.
double hit_azimuth(const Vec3& local_point, double spindle_angle);

std::optional<CutterHit> line_cutter_intersection(const Vec3& line_origin, const Vec3& line_dir,
                                                  const ToolState& state,
                                                  const ToolDefinition& tool);

}  // namespace surftopo
