#include "surftopo/plane_job.hpp"

#include "surftopo/errors.hpp"
#include "surftopo/surface.hpp"
#include "surftopo/trajectory.hpp"

#include <cmath>

namespace surftopo {

Vec3 oriented_axis(double theta_n, double theta_t) {
  return Vec3(std::sin(theta_t) * std::cos(theta_n), std::sin(theta_t) * std::sin(theta_n),
              std::cos(theta_t));
}

double contact_tip_height(const ToolDefinition& tool, const Vec3& axis, double z0) {
  const Vec3 a = axis.normalized();
  const double s = std::hypot(a.x(), a.y());
  return z0 + tool.r * (1.0 - a.z()) + (tool.R - tool.r) * s;
}

void PlanePassJob::validate() const {
  tool.validate();
  if (!(std::abs(yaw_deg) < 90.0) || !(tilt_deg >= 0.0 && tilt_deg < 90.0)) {
    throw DomainError("plane job: yaw must lie in (-90, 90) deg and tilt in [0, 90) deg");
  }
  if (!(stepover_mm > 0.0)) throw DomainError("plane job: stepover must be positive");
  if (!(vf_m_per_min > 0.0)) throw DomainError("plane job: feedrate must be positive");
  if (fz_mm <= 0.0 && !(spindle_rpm > 0.0)) throw DomainError("plane job: spindle speed must be positive");
  if (!(d_alpha_deg > 0.0)) throw DomainError("plane job: angular step must be positive");
  if (!(stock_mm > 0.0)) throw DomainError("plane job: stock must be positive");
  if (nx < 3 || ny < 3) throw DomainError("plane job: grid must be at least 3x3");
  if (!(window_mm > 0.0)) throw DomainError("plane job: window must be positive");
}

double PlanePassJob::spindle_speed() const {
  const double vf = vf_m_per_min * kMetersPerMinuteToMmPerSecond;
  if (fz_mm > 0.0) return kTwoPi * vf / (fz_mm * tool.tooth_count);
  return spindle_rpm * kRpmToRadPerSecond;
}

double PlanePassJob::feed_per_tooth() const {
  const double vf = vf_m_per_min * kMetersPerMinuteToMmPerSecond;
  return vf * kTwoPi / (spindle_speed() * tool.tooth_count);
}

PlanePassResult run_plane_passes(const PlanePassJob& job) {
  job.validate();
  const double fz = job.feed_per_tooth();
  const double lx = std::max(1.0, std::round(job.window_mm / fz)) * fz;
  const double ly = std::max(1.0, std::round(job.window_mm / job.stepover_mm)) * job.stepover_mm;
  GridBounds bounds;
  bounds.xmin = 0.0;
  bounds.ymin = 0.0;
  bounds.xmax = lx * static_cast<double>(job.nx - 1) / static_cast<double>(job.nx);
  bounds.ymax = ly * static_cast<double>(job.ny - 1) / static_cast<double>(job.ny);
  LineNet net = make_plane_net(job.z0, bounds, job.nx, job.ny, job.stock_mm);

  const Vec3 axis = oriented_axis(deg2rad(job.yaw_deg), deg2rad(job.tilt_deg));
  const double tip_z = contact_tip_height(job.tool, axis, job.z0);
  const double reach = job.tool.R + job.tool.flute_height * std::hypot(axis.x(), axis.y()) + 1.0;
  const double vf = job.vf_m_per_min * kMetersPerMinuteToMmPerSecond;

  PlanePassResult result;
  result.spindle_speed = job.spindle_speed();
  result.window_x = lx;
  result.window_y = ly;
  NBufferEngine engine(net, job.tool, job.mode, job.engine);
  const auto k_lo = static_cast<long>(std::floor(-reach / job.stepover_mm));
  const auto k_hi = static_cast<long>(std::ceil((ly + reach) / job.stepover_mm));
  // Feed marks must be in phase from one window edge to the other, so the
  // pass start is snapped to a whole number of feed marks.
  const double x_start = -std::ceil(reach / fz) * fz;
  const double x_end = lx + reach;
  double alpha = 0.0;
  for (long k = k_lo; k <= k_hi; ++k) {
    const double y = static_cast<double>(k) * job.stepover_mm;
    Trajectory traj;
    traj.spindle_speed = result.spindle_speed;
    traj.postures.push_back({Vec3(x_start, y, tip_z), axis, vf});
    traj.postures.push_back({Vec3(x_end, y, tip_z), axis, vf});
    SamplingStats st;
    const auto states = sample_trajectory(traj, deg2rad(job.d_alpha_deg), alpha, &st);
    alpha = st.alpha_end;
    engine.cut(states);
    ++result.passes;
  }
  result.stats = engine.stats();
  result.field = heightfield_from_net(net);
  result.offsets = raw_offsets(net);
  return result;
}

}  // namespace surftopo
