#pragma once

#include "surftopo/heightfield.hpp"
#include "surftopo/nbuffer.hpp"
#include "surftopo/tool.hpp"

#include <cstddef>

namespace surftopo {

// Tool axis for yaw theta_n and tilt theta_t (radians) over a plane with
// +z normal, feeding along +x: the axis leans by theta_t, in the direction
// rotated by theta_n from the feed direction.
Vec3 oriented_axis(double theta_n, double theta_t);

// Tip height that puts the lowest cutter point on z0.
double contact_tip_height(const ToolDefinition& tool, const Vec3& axis, double z0);

// Parallel one-way passes along +x over a plane, with the evaluation
// window snapped to whole feed marks and whole stepovers so the sampled
// field is periodic.
struct PlanePassJob {
  ToolDefinition tool;
  double yaw_deg = 0.0;
  double tilt_deg = 1.0;
  double stepover_mm = 1.0;
  double vf_m_per_min = 2.0;
  double fz_mm = 0.0;           // > 0: spindle speed derived from fz and feedrate
  double spindle_rpm = 14800.0; // used when fz_mm <= 0
  double d_alpha_deg = 1.0;
  double z0 = 0.0;
  double stock_mm = 0.05;
  std::size_t nx = 1024;
  std::size_t ny = 1024;
  double window_mm = 3.0;       // target window size before snapping
  SimulationMode mode;
  EngineOptions engine;

  void validate() const;
  // rad/s
  double spindle_speed() const;
  double feed_per_tooth() const;
};

struct PlanePassResult {
  HeightField field;    // heights (um) relative to the deepest cut, not levelled
  HeightField offsets;  // raw cut offsets (um)
  SimulationStats stats;
  std::size_t passes = 0;
  double spindle_speed = 0.0;  // rad/s
  double window_x = 0.0;       // mm
  double window_y = 0.0;       // mm
};

PlanePassResult run_plane_passes(const PlanePassJob& job);

}  // namespace surftopo
