#include "surftopo/paths.hpp"

#include "surftopo/errors.hpp"
#include "surftopo/surface.hpp"

#include <cmath>

namespace surftopo {

double FeedProfile::at(double u) const {
  if (!trapezoid) return fast;
  const double plateau_lo = 0.5 - 0.5 * slow_fraction;
  const double plateau_hi = 0.5 + 0.5 * slow_fraction;
  const double ramp_lo = plateau_lo - ramp_fraction;
  const double ramp_hi = plateau_hi + ramp_fraction;
  if (u <= ramp_lo || u >= ramp_hi) return fast;
  if (u >= plateau_lo && u <= plateau_hi) return slow;
  const double t = u < plateau_lo ? (u - ramp_lo) / ramp_fraction : (ramp_hi - u) / ramp_fraction;
  return fast + (slow - fast) * t;
}

Vec3 contact_tip(const Vec3& s, const Vec3& n, const Vec3& a, const ToolDefinition& tool) {
  const Vec3 radial = -n + n.dot(a) * a;
  const double len = radial.norm();
  if (len < 1e-12) return s;  // flat bottom lies on the tangent plane
  const Vec3 u = radial / len;
  return s - tool.r * a - (tool.R - tool.r) * u + tool.r * n;
}

namespace {

std::size_t segment_count(double length, double step) {
  if (!(step > 0.0)) throw DomainError("path: posture step must be positive");
  if (!(length > 0.0)) throw DomainError("path: path length must be positive");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(length / step - 1e-9)));
}

}  // namespace

std::vector<ToolPosture> plane_line_postures(double z0, double y, double x_from, double x_to,
                                             double tilt, const ToolDefinition& tool,
                                             double step, const FeedProfile& feed) {
  const std::size_t n = segment_count(x_to - x_from, step);
  const Vec3 normal = Vec3::UnitZ();
  const Vec3 axis(std::sin(tilt), 0.0, std::cos(tilt));
  std::vector<ToolPosture> out;
  out.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(n);
    const Vec3 s(x_from + u * (x_to - x_from), y, z0);
    out.push_back({contact_tip(s, normal, axis, tool), axis, feed.at(u)});
  }
  return out;
}

std::vector<ToolPosture> hypar_rule_postures(double k, double x_rule, double y_from, double y_to,
                                             double tilt, const ToolDefinition& tool, double step,
                                             const FeedProfile& feed) {
  const NominalSurface surface = NominalSurface::hypar(k);
  const std::size_t n = segment_count(y_to - y_from, step);
  std::vector<ToolPosture> out;
  out.reserve(n + 1);
  const Vec3 dir = Vec3(0.0, 1.0, x_rule / k).normalized();  // the rule is a straight line
  for (std::size_t i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n);
    const double y = y_from + u * (y_to - y_from);
    const Vec3 s(x_rule, y, surface.height(x_rule, y));
    const Vec3 normal = surface_normal(surface, x_rule, y);
    const Vec3 feed_dir = (dir - dir.dot(normal) * normal).normalized();
    const Vec3 axis = (std::cos(tilt) * normal + std::sin(tilt) * feed_dir).normalized();
    out.push_back({contact_tip(s, normal, axis, tool), axis, feed.at(u)});
  }
  return out;
}

}  // namespace surftopo
