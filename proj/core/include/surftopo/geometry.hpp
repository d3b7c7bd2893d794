#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace surftopo {

using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle into [0, period).
inline double wrap_angle(double angle, double period = kTwoPi) {
  double w = std::fmod(angle, period);
  if (w < 0.0) w += period;
  if (w >= period) w = 0.0;
  return w;
}

// Orthonormal frame attached to a tool axis. e1 is the spindle reference
// direction: global +X projected onto the plane normal to the axis, or +Y
// when the axis is (nearly) parallel to X.
struct AxisFrame {
  Vec3 axis;
  Vec3 e1;
  Vec3 e2;

  static AxisFrame from_axis(const Vec3& axis) {
    AxisFrame f;
    f.axis = axis.normalized();
    Vec3 ref = Vec3::UnitX() - f.axis.x() * f.axis;
    if (ref.norm() < 1e-6) ref = Vec3::UnitY() - f.axis.y() * f.axis;
    f.e1 = ref.normalized();
    f.e2 = f.axis.cross(f.e1);
    return f;
  }

  // World vector -> tool-frame coordinates (e1, e2, axis).
  Vec3 to_local(const Vec3& v) const { return {v.dot(e1), v.dot(e2), v.dot(axis)}; }
  Vec3 to_world(const Vec3& v) const { return v.x() * e1 + v.y() * e2 + v.z() * axis; }
};

}  // namespace surftopo
