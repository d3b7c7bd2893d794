#pragma once

#include "surftopo/tool.hpp"
#include "surftopo/trajectory.hpp"

#include <vector>

namespace surftopo {

// Feedrate along a path as a function of the normalised arc position u in
// [0, 1]: constant, or a trapezoidal dip to `slow` centred on u = 0.5.
struct FeedProfile {
  double fast = 0.0;            // mm/s
  double slow = 0.0;            // mm/s, dip level
  bool trapezoid = false;
  double ramp_fraction = 0.15;  // length share of each ramp
  double slow_fraction = 0.30;  // length share of the slow plateau

  static FeedProfile constant(double vf) { return {vf, vf, false, 0.15, 0.30}; }
  static FeedProfile dip(double fast, double slow) { return {fast, slow, true, 0.15, 0.30}; }
  double at(double u) const;
};

// Tip position putting the filleted cutter (axis a) in contact with a
// surface point s whose upward unit normal is n.
Vec3 contact_tip(const Vec3& s, const Vec3& n, const Vec3& a, const ToolDefinition& tool);

// Straight path along +x on the plane z = z0 at height y, tilt leaning
// the axis towards the feed, postures every `step` mm.
std::vector<ToolPosture> plane_line_postures(double z0, double y, double x_from, double x_to,
                                             double tilt, const ToolDefinition& tool,
                                             double step, const FeedProfile& feed);

// Path along the rule x = x_rule of z = x y / k, feeding towards +y, with
// the axis tilted from the local normal towards the feed by `tilt`
// (radians). Postures every `step` mm of y.
std::vector<ToolPosture> hypar_rule_postures(double k, double x_rule, double y_from, double y_to,
                                             double tilt, const ToolDefinition& tool, double step,
                                             const FeedProfile& feed);

}  // namespace surftopo
