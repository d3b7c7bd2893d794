#include "surftopo/tool.hpp"

#include "surftopo/errors.hpp"
#include "surftopo/quartic.hpp"
#include "surftopo/tool_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace surftopo {

ToolDefinition ToolDefinition::filleted(double R, double r, int tooth_count) {
  ToolDefinition t;
  t.R = R;
  t.r = r;
  t.tooth_count = tooth_count;
  t.flute_height = 2.0 * R;
  t.validate();
  return t;
}

void ToolDefinition::validate() const {
  if (!(R > r && r > 0.0)) {
    throw DomainError("tool: require R > r > 0 (R=" + std::to_string(R) +
                      ", r=" + std::to_string(r) + ")");
  }
  if (tooth_count < 1) throw DomainError("tool: tooth_count must be >= 1");
  if (!(flute_height > r)) throw DomainError("tool: flute height must exceed the corner radius");
  if (mesh) {
    for (const Vec3& v : mesh->vertices()) {
      if (std::hypot(v.x(), v.y()) > R + 1e-6) {
        throw DomainError("tool: mesh vertex lies outside the nominal radius");
      }
    }
  }
}

double profile_height(double rho, const ToolDefinition& tool) {
  if (!(rho >= 0.0 && rho <= tool.R)) {
    throw DomainError("profile_height: rho outside [0, R]");
  }
  const double flat = tool.R - tool.r;
  if (rho <= flat) return 0.0;
  const double d = rho - flat;
  return tool.r - std::sqrt(std::max(0.0, tool.r * tool.r - d * d));
}

double effective_radius(double theta_n, double theta_t, const ToolDefinition& tool,
                        RadiusFormula variant) {
  if (!(theta_t >= 0.0 && theta_t <= kPi / 2.0)) {
    throw DomainError("effective_radius: tilt must lie in (0, 90] degrees");
  }
  if (theta_t == 0.0) {
    // Vertical axis: the flat bottom has no finite transverse radius.
    throw SingularOrientationError("effective_radius: singular orientation (zero tilt)");
  }
  if (!(std::abs(theta_n) < kPi / 2.0)) {
    throw DomainError("effective_radius: |yaw| must be below 90 degrees");
  }
  const double R = tool.R;
  const double r = tool.r;
  const double st = std::sin(theta_t);
  const double cn = std::cos(theta_n);
  const double sn = std::sin(theta_n);
  const double second = variant == RadiusFormula::kAsPrinted ? cn * cn : sn * sn;
  const double denom = R * st * cn * cn + (R + r * st) * second;
  if (denom <= 1e-12) {
    throw SingularOrientationError("effective_radius: singular orientation (denominator vanishes)");
  }
  return r * (R + r * st) / denom;
}

FilletedCutter::FilletedCutter(const ToolDefinition& tool)
    : R_(tool.R), r_(tool.r), Rm_(tool.R - tool.r), H_(tool.flute_height) {}

bool FilletedCutter::contains_local(const Vec3& p) const {
  if (p.z() < 0.0 || p.z() > H_) return false;
  const double rho = std::hypot(p.x(), p.y());
  if (rho > R_) return false;
  if (p.z() >= r_ || rho <= Rm_) return true;
  const double dr = rho - Rm_;
  const double dz = p.z() - r_;
  return dr * dr + dz * dz <= r_ * r_;
}

std::optional<LocalHit> FilletedCutter::intersect_local(const Vec3& p, const Vec3& d) const {
  constexpr double kEdge = 1e-12;
  LocalHit best;
  best.t = std::numeric_limits<double>::infinity();
  auto consider = [&](double t, const Vec3& point, const Vec3& normal) {
    if (t >= 0.0 && t < best.t) {
      best.t = t;
      best.point = point;
      best.normal = normal;
    }
  };

  // Flat bottom, z = 0, rho <= Rm.
  if (d.z() != 0.0) {
    const double t = -p.z() / d.z();
    const Vec3 x = p + t * d;
    if (x.x() * x.x() + x.y() * x.y() <= Rm_ * Rm_ * (1.0 + kEdge) + kEdge) {
      consider(t, Vec3(x.x(), x.y(), 0.0), -Vec3::UnitZ());
    }
    // Barrel cap, z = H.
    const double tc = (H_ - p.z()) / d.z();
    const Vec3 xc = p + tc * d;
    if (xc.x() * xc.x() + xc.y() * xc.y() <= R_ * R_) {
      consider(tc, Vec3(xc.x(), xc.y(), H_), Vec3::UnitZ());
    }
  }

  // Barrel, rho = R, r <= z <= H.
  const double a2 = d.x() * d.x() + d.y() * d.y();
  if (a2 > 0.0) {
    const double b2 = p.x() * d.x() + p.y() * d.y();
    const double c2 = p.x() * p.x() + p.y() * p.y() - R_ * R_;
    const RealRoots roots = solve_quadratic(2.0 * b2 / a2, c2 / a2, 0.0);
    for (double t : roots) {
      const Vec3 x = p + t * d;
      if (x.z() >= r_ && x.z() <= H_) {
        const double rho = std::hypot(x.x(), x.y());
        consider(t, x, Vec3(x.x() / rho, x.y() / rho, 0.0));
      }
    }
  }

  // Fillet: lower outer quadrant of the torus with centre circle radius Rm at
  // height r and tube radius r. The quartic is written about the point of
  // closest approach to the torus centre to keep the coefficients small.
  {
    const Vec3 q = p - Vec3(0.0, 0.0, r_);
    const double u0 = -q.dot(d);
    const Vec3 q0 = q + u0 * d;
    const double A = a2;
    const double B = q0.x() * d.x() + q0.y() * d.y();
    const double C = q0.x() * q0.x() + q0.y() * q0.y();
    const double g0 = q0.squaredNorm() + Rm_ * Rm_ - r_ * r_;
    const double rm2 = Rm_ * Rm_;
    const RealRoots roots =
        solve_quartic(0.0, 2.0 * g0 - 4.0 * rm2 * A, -8.0 * rm2 * B, g0 * g0 - 4.0 * rm2 * C);
    for (double u : roots) {
      const double t = u + u0;
      const Vec3 x = p + t * d;
      const double rho = std::hypot(x.x(), x.y());
      const double dz = x.z() - r_;
      if (dz > kEdge * r_ || rho < Rm_ * (1.0 - kEdge)) continue;
      const double dr = rho - Rm_;
      // Reject roots on the far side of the centre circle (spindle tori).
      if (std::abs(std::sqrt(dr * dr + dz * dz) - r_) > 1e-9) continue;
      Vec3 normal;
      if (rho > 0.0) {
        normal = Vec3(dr * x.x() / rho, dr * x.y() / rho, dz) / r_;
      } else {
        normal = -Vec3::UnitZ();
      }
      consider(t, x, normal);
    }
  }

  if (!std::isfinite(best.t)) return std::nullopt;
  return best;
}

double hit_azimuth(const Vec3& local_point, double spindle_angle) {
  return wrap_angle(std::atan2(local_point.y(), local_point.x()) - spindle_angle);
}

std::optional<CutterHit> line_cutter_intersection(const Vec3& line_origin, const Vec3& line_dir,
                                                  const ToolState& state,
                                                  const ToolDefinition& tool) {
  const AxisFrame frame = AxisFrame::from_axis(state.axis);
  const FilletedCutter cutter(tool);
  const auto hit = cutter.intersect_local(frame.to_local(line_origin - state.tip),
                                          frame.to_local(line_dir));
  if (!hit) return std::nullopt;
  return CutterHit{hit->t, hit_azimuth(hit->point, state.spindle_angle)};
}

}  // namespace surftopo
