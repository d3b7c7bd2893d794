#include "surftopo/errors.hpp"
#include "surftopo/tool.hpp"
#include "surftopo/tool_mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace surftopo;

namespace {

const ToolDefinition kTool = ToolDefinition::filleted(5.0, 1.5);

// Membership of the bull-nose solid written from its construction: a disk
// of radius R - r at height r swept by a ball of radius r, unioned with the
// barrel above z = r, clipped to [0, H].
bool inside_oracle(const Vec3& p, const ToolDefinition& t) {
  if (p.z() < 0.0 || p.z() > t.flute_height) return false;
  const double rho = std::sqrt(p.x() * p.x() + p.y() * p.y());
  if (p.z() >= t.r) return rho <= t.R;
  const double out = std::max(rho - (t.R - t.r), 0.0);
  return out * out + (p.z() - t.r) * (p.z() - t.r) <= t.r * t.r;
}

// First entry along p + t d by fine marching then bisection.
std::optional<double> first_entry_oracle(const Vec3& p, const Vec3& d, double t_max,
                                         const ToolDefinition& tool) {
  const double step = 2e-4;
  if (inside_oracle(p, tool)) return 0.0;
  for (double t = step; t <= t_max; t += step) {
    if (inside_oracle(p + t * d, tool)) {
      double lo = t - step, hi = t;
      for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (inside_oracle(p + mid * d, tool) ? hi : lo) = mid;
      }
      return hi;
    }
  }
  return std::nullopt;
}

Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> n;
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

Vec3 random_interior_point(std::mt19937& rng, const ToolDefinition& t) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    Vec3 p(t.R * u(rng), t.R * u(rng), 0.5 * t.flute_height * (u(rng) + 1.0));
    if (inside_oracle(p, t)) return p;
  }
}

}  // namespace

TEST(ToolDefinition, RejectsInvalidGeometry) {
  EXPECT_THROW(ToolDefinition::filleted(5.0, 5.0), DomainError);
  EXPECT_THROW(ToolDefinition::filleted(5.0, 0.0), DomainError);
  EXPECT_THROW(ToolDefinition::filleted(5.0, 1.5, 0), DomainError);
}

TEST(ProfileHeight, FlatFilletAndRim) {
  EXPECT_DOUBLE_EQ(profile_height(0.0, kTool), 0.0);
  EXPECT_DOUBLE_EQ(profile_height(3.5, kTool), 0.0);
  EXPECT_NEAR(profile_height(5.0, kTool), 1.5, 1e-15);
  // rho = 4.25: 1.5 - sqrt(1.5^2 - 0.75^2)
  EXPECT_NEAR(profile_height(4.25, kTool), 1.5 - std::sqrt(2.25 - 0.5625), 1e-15);
  EXPECT_THROW(profile_height(5.01, kTool), DomainError);
  EXPECT_THROW(profile_height(-0.1, kTool), DomainError);
}

TEST(EffectiveRadius, WorkedValues) {
  // Hand-evaluated: yaw 0, tilt 1 deg; yaw 0, tilt 90 deg.
  EXPECT_NEAR(effective_radius(0.0, deg2rad(1.0), kTool), 1.4744, 5e-5);
  EXPECT_NEAR(effective_radius(0.0, deg2rad(1.0), kTool, RadiusFormula::kSinSquaredYaw), 86.398,
              5e-3);
  EXPECT_NEAR(effective_radius(0.0, deg2rad(90.0), kTool), 0.8478, 5e-5);
}

TEST(EffectiveRadius, MatchesClosedForm) {
  for (double yaw : {-60.0, -20.0, 0.0, 15.0, 40.0, 80.0}) {
    for (double tilt : {0.5, 1.0, 10.0, 45.0, 90.0}) {
      const double tn = deg2rad(yaw), tt = deg2rad(tilt);
      const double R = 5.0, r = 1.5;
      const double num = r * (R + r * std::sin(tt));
      const double c2 = std::cos(tn) * std::cos(tn), s2 = std::sin(tn) * std::sin(tn);
      const double printed = num / (R * std::sin(tt) * c2 + (R + r * std::sin(tt)) * c2);
      const double sinsq = num / (R * std::sin(tt) * c2 + (R + r * std::sin(tt)) * s2);
      EXPECT_NEAR(effective_radius(tn, tt, kTool), printed, 1e-12 * printed);
      if (yaw != 0.0 || tilt > 0.0) {
        EXPECT_NEAR(effective_radius(tn, tt, kTool, RadiusFormula::kSinSquaredYaw), sinsq,
                    1e-12 * sinsq);
      }
    }
  }
}

TEST(EffectiveRadius, DomainAndSingularity) {
  EXPECT_THROW(effective_radius(0.0, 0.0, kTool), SingularOrientationError);
  EXPECT_THROW(effective_radius(0.0, -0.1, kTool), DomainError);
  EXPECT_THROW(effective_radius(0.0, deg2rad(91.0), kTool), DomainError);
  EXPECT_THROW(effective_radius(deg2rad(90.0), 0.5, kTool), DomainError);
}

TEST(Intersection, VerticalLinesFollowProfile) {
  ToolState s;
  s.tip = Vec3(1.0, -2.0, 0.3);
  for (double rho : {0.0, 1.0, 3.5, 3.9, 4.5, 4.99}) {
    const Vec3 from = s.tip + Vec3(rho, 0.0, -10.0);
    const auto hit = line_cutter_intersection(from, Vec3::UnitZ(), s, kTool);
    ASSERT_TRUE(hit) << rho;
    EXPECT_NEAR(hit->t - 10.0, profile_height(rho, kTool), 1e-10) << rho;
  }
  EXPECT_FALSE(line_cutter_intersection(s.tip + Vec3(5.01, 0, -10), Vec3::UnitZ(), s, kTool));
}

TEST(Intersection, MatchesMembershipOracle) {
  std::mt19937 rng(3);
  const FilletedCutter cutter(kTool);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Vec3 target = random_interior_point(rng, kTool);
    const Vec3 d = random_unit(rng);
    const Vec3 p = target - 25.0 * d;
    const auto hit = cutter.intersect_local(p, d);
    const auto ref = first_entry_oracle(p, d, 25.0, kTool);
    ASSERT_TRUE(ref);
    ASSERT_TRUE(hit) << trial;
    EXPECT_NEAR(hit->t, *ref, 1e-9) << trial;
    EXPECT_NEAR(hit->normal.norm(), 1.0, 1e-9);
    EXPECT_LE(hit->normal.dot(d), 1e-9);
    ++checked;
  }
  EXPECT_EQ(checked, 300);
}

TEST(Intersection, MissesWhenLinePassesOutside) {
  std::mt19937 rng(5);
  const FilletedCutter cutter(kTool);
  for (int trial = 0; trial < 200; ++trial) {
    Vec3 d = random_unit(rng);
    // Lines tangent to a sphere enclosing the tool never enter it.
    const Vec3 centre(0, 0, 5.0);
    const double enclosing = std::hypot(5.0, 5.0) + 0.01;
    Vec3 side = d.unitOrthogonal();
    const Vec3 p = centre + enclosing * side - 30.0 * d;
    EXPECT_FALSE(cutter.intersect_local(p, d)) << trial;
  }
}

TEST(Intersection, RotationalSymmetry) {
  const FilletedCutter cutter(kTool);
  const Vec3 p(7.0, 0.3, 0.8), d = Vec3(-1.0, 0.05, -0.2).normalized();
  const auto base = cutter.intersect_local(p, d);
  ASSERT_TRUE(base);
  for (double a : {0.3, 1.0, 2.5, 4.0}) {
    const Eigen::AngleAxisd rot(a, Vec3::UnitZ());
    const auto h = cutter.intersect_local(rot * p, rot * d);
    ASSERT_TRUE(h);
    EXPECT_NEAR(h->t, base->t, 1e-10);
  }
}

TEST(Intersection, InsideOriginHitsAtZero) {
  const FilletedCutter cutter(kTool);
  const auto h = cutter.intersect_local(Vec3(0, 0, 1.0), Vec3::UnitX());
  ASSERT_TRUE(h);
  // z = 1 lies in the fillet band: exit at rho = (R - r) + sqrt(r^2 - (r - z)^2).
  EXPECT_NEAR(h->t, 3.5 + std::sqrt(2.0), 1e-12);
  EXPECT_GT(h->normal.dot(Vec3::UnitX()), 0.0);
}

TEST(Intersection, AzimuthFollowsSpindleAngle) {
  ToolState s;
  s.spindle_angle = 0.5;
  const auto hit = line_cutter_intersection(Vec3(0.0, 4.0, -1.0), Vec3::UnitZ(), s, kTool);
  ASSERT_TRUE(hit);
  EXPECT_NEAR(hit->phi, kPi / 2.0 - 0.5, 1e-12);
}

TEST(ToolMesh, AgreesWithAnalyticWithinChord) {
  const double chord = 1e-3;
  const ToolMesh mesh = mesh_tool(kTool, chord);
  EXPECT_EQ(mesh.degenerate_count(), 0u);
  const FilletedCutter cutter(kTool);
  std::mt19937 rng(9);
  int compared = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec3 target = random_interior_point(rng, kTool);
    const Vec3 d = random_unit(rng);
    const Vec3 p = target - 25.0 * d;
    const auto a = cutter.intersect_local(p, d);
    ASSERT_TRUE(a);
    // Grazing incidence magnifies the facet deviation along the line.
    if (std::abs(a->normal.dot(d)) < 0.5) continue;
    const auto m = mesh.intersect_local(p, d);
    ASSERT_TRUE(m) << trial;
    EXPECT_LE(std::abs(m->t - a->t), 2.0 * chord / std::abs(a->normal.dot(d)) + 1e-12) << trial;
    ++compared;
  }
  EXPECT_GT(compared, 400);
}

TEST(ToolMesh, VerticesLieOnAnalyticSurface) {
  const ToolMesh mesh = mesh_tool(kTool, 1e-3);
  for (const Vec3& v : mesh.vertices()) {
    const double rho = std::hypot(v.x(), v.y());
    ASSERT_LE(rho, kTool.R + 1e-9);
    if (v.z() < kTool.r - 1e-9 && rho > 1e-9 && v.z() > 1e-12) {
      EXPECT_NEAR(v.z(), profile_height(std::min(rho, kTool.R), kTool), 1e-9);
    }
  }
}

TEST(ToolMesh, StlRoundTrip) {
  const ToolMesh mesh = mesh_tool(kTool, 1e-2);
  const auto path = std::filesystem::temp_directory_path() / "surftopo_tool_rt.stl";
  write_stl_ascii(mesh, path);
  const ToolMesh back = read_stl_ascii(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.triangles().size(), mesh.triangles().size());
  const Vec3 p(0.3, 0.2, -5.0);
  const auto a = mesh.intersect_local(p, Vec3::UnitZ());
  const auto b = back.intersect_local(p, Vec3::UnitZ());
  ASSERT_TRUE(a && b);
  EXPECT_NEAR(a->t, b->t, 1e-9);
}

TEST(ToolMesh, RejectsBadRequests) {
  EXPECT_THROW(mesh_tool(kTool, 0.0), DomainError);
  EXPECT_THROW(mesh_tool(kTool, 1e-6, 1000), ResourceError);
  EXPECT_THROW(read_stl_ascii("/nonexistent/tool.stl"), IoError);
}
