#include "surftopo/errors.hpp"
#include "surftopo/trajectory.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace surftopo;

namespace {

ToolPosture posture(double x, double y, double z, double vf) {
  ToolPosture p;
  p.tip = Vec3(x, y, z);
  p.feedrate = vf;
  return p;
}

}  // namespace

TEST(SegmentLength, Examples) {
  EXPECT_DOUBLE_EQ(segment_length(posture(0, 0, 0, 1), posture(3, 4, 0, 1)), 5.0);
  EXPECT_NEAR(segment_length(posture(0, 0, 0, 1), posture(1, 2, 3, 1)), std::sqrt(14.0), 1e-15);
  EXPECT_DOUBLE_EQ(segment_length(posture(2, 2, 2, 1), posture(2, 2, 2, 1)), 0.0);
}

TEST(SegmentDuration, MeanVelocity) {
  EXPECT_DOUBLE_EQ(segment_duration(10.0, 50.0, 50.0), 0.2);
  EXPECT_DOUBLE_EQ(segment_duration(20.0, 40.0, 60.0), 0.4);
  EXPECT_DOUBLE_EQ(segment_duration(10.0, 40.0, 60.0), 0.2);
  EXPECT_THROW(segment_duration(1.0, 0.0, 0.0), DomainError);
  EXPECT_THROW(segment_duration(-1.0, 1.0, 1.0), DomainError);
}

TEST(SpindleAngle, Advance) {
  EXPECT_DOUBLE_EQ(advance_spindle_angle(0.5, 100.0, 0.01), 1.5);
  EXPECT_DOUBLE_EQ(advance_spindle_angle(0.0, 2.0 * kPi * 10.0, 0.1), 2.0 * kPi);
}

// Ramp 40 -> 60 mm/s, sampling period dt = 0.02 s, fifth sample.
TEST(SampleSegment, RampOverTwentyMillimetres) {
  const double omega = 2.0 * kPi * 10.0;
  const double d_alpha = 0.02 * omega;
  const auto seg = sample_segment(posture(0, 0, 0, 40), posture(20, 0, 0, 60), 0.0, omega, d_alpha);
  ASSERT_GE(seg.states.size(), 5u);
  const auto& s5 = seg.states[4];
  EXPECT_NEAR(s5.feedrate, 45.0, 1e-9);
  EXPECT_NEAR(s5.state.tip.x(), 4.25, 1e-9);
  EXPECT_NEAR(s5.time, 0.1, 1e-12);
  EXPECT_NEAR(seg.time_end, 0.4, 1e-12);
}

TEST(SampleSegment, RampOverTwoTenthsOfASecond) {
  const double omega = 2.0 * kPi * 10.0;
  const double d_alpha = 0.02 * omega;
  const auto seg = sample_segment(posture(0, 0, 0, 40), posture(10, 0, 0, 60), 0.0, omega, d_alpha);
  const auto& s5 = seg.states[4];
  EXPECT_NEAR(s5.feedrate, 50.0, 1e-9);
  EXPECT_NEAR(s5.state.tip.x(), 4.5, 1e-9);
}

TEST(SampleSegment, CountAndClosure) {
  const double omega = 100.0;
  const double d_alpha = 0.7;
  // 10 mm at 50 mm/s: 0.2 s, 20 rad, floor(20/0.7) = 28 grid samples.
  const auto seg = sample_segment(posture(0, 0, 0, 50), posture(10, 0, 0, 50), 1.0, omega, d_alpha);
  ASSERT_EQ(seg.states.size(), 29u);
  EXPECT_FALSE(seg.undersampled);
  EXPECT_NEAR(seg.alpha_end, 21.0, 1e-12);
  EXPECT_EQ(seg.states.back().state.tip, Vec3(10, 0, 0));
  EXPECT_DOUBLE_EQ(seg.states.back().alpha, seg.alpha_end);
  for (std::size_t k = 0; k < seg.states.size(); ++k) {
    const auto& s = seg.states[k];
    EXPECT_NEAR(s.alpha - 1.0, omega * s.time, 1e-9);
    EXPECT_GE(s.state.spindle_angle, 0.0);
    EXPECT_LT(s.state.spindle_angle, kTwoPi);
    if (k > 0) EXPECT_GT(s.state.tip.x(), seg.states[k - 1].state.tip.x());
  }
}

TEST(SampleSegment, ExactGridEndIsNotDuplicated) {
  // 1 mm at 10 mm/s: 0.1 s, 10 rad, 10 samples of 1 rad.
  const auto seg = sample_segment(posture(0, 0, 0, 10), posture(1, 0, 0, 10), 0.0, 100.0, 1.0);
  ASSERT_EQ(seg.states.size(), 10u);
  EXPECT_EQ(seg.states.back().state.tip, Vec3(1, 0, 0));
}

TEST(SampleSegment, UndersampledStillCloses) {
  const auto seg = sample_segment(posture(0, 0, 0, 100), posture(0.01, 0, 0, 100), 0.0, 10.0, 1.0);
  EXPECT_TRUE(seg.undersampled);
  ASSERT_EQ(seg.states.size(), 1u);
  EXPECT_EQ(seg.states[0].state.tip, Vec3(0.01, 0, 0));
}

TEST(SampleTrajectory, HalvingStepGivesBitIdenticalSuperset) {
  Trajectory traj;
  traj.spindle_speed = 1549.85;
  traj.postures = {posture(0, 0, 0, 33.3), posture(4, 1, 0, 60), posture(7, 1, 0.5, 20)};
  const auto coarse = sample_trajectory(traj, deg2rad(2.0));
  const auto fine = sample_trajectory(traj, deg2rad(1.0));
  // Grid samples of the first segment coincide at matching angles.
  std::size_t matched = 0;
  for (const auto& c : coarse) {
    for (const auto& f : fine) {
      if (f.alpha == c.alpha) {
        EXPECT_EQ(f.state.tip, c.state.tip);
        EXPECT_EQ(f.feedrate, c.feedrate);
        ++matched;
        break;
      }
    }
  }
  EXPECT_GT(matched, coarse.size() / 3);
}

TEST(SampleTrajectory, FeedScalingScalesSpacing) {
  Trajectory a;
  a.spindle_speed = 1000.0;
  a.postures = {posture(0, 0, 0, 20), posture(5, 0, 0, 20)};
  Trajectory b = a;
  for (auto& p : b.postures) p.feedrate *= 0.5;
  const auto sa = sample_trajectory(a, 0.1);
  const auto sb = sample_trajectory(b, 0.1);
  EXPECT_NEAR(sa[1].state.tip.x() - sa[0].state.tip.x(),
              2.0 * (sb[1].state.tip.x() - sb[0].state.tip.x()), 1e-15);
}

TEST(SampleTrajectory, ThreadsAngleAndWindows) {
  Trajectory traj;
  traj.spindle_speed = 500.0;
  traj.postures = {posture(0, 0, 0, 10), posture(1, 0, 0, 10), posture(1, 1, 0, 10),
                   posture(0, 0, 0, 10)};
  SamplingStats stats;
  const auto states = sample_trajectory(traj, 0.3, 0.0, &stats);
  EXPECT_EQ(stats.segments, 3u);
  EXPECT_NEAR(stats.total_time, (2.0 + std::sqrt(2.0)) / 10.0, 1e-12);
  EXPECT_NEAR(stats.alpha_end, 500.0 * stats.total_time, 1e-9);
  // Closed loop returns to the start.
  EXPECT_EQ(states.back().state.tip, traj.postures.front().tip);
  for (std::size_t k = 0; k + 1 < states.size(); ++k) {
    EXPECT_DOUBLE_EQ(states[k].window_end, states[k + 1].alpha);
    EXPECT_GT(states[k].window_length(), 0.0);
  }
}

TEST(TrajectoryValidate, RejectsBadInput) {
  Trajectory t;
  t.spindle_speed = 10.0;
  t.postures = {posture(0, 0, 0, 1)};
  EXPECT_THROW(t.validate(), DomainError);
  t.postures.push_back(posture(0, 0, 0, 1));
  EXPECT_THROW(t.validate(), DomainError);
  t.postures[1] = posture(1, 0, 0, 0);
  EXPECT_THROW(t.validate(), DomainError);
  t.postures[1] = posture(1, 0, 0, 1);
  t.spindle_speed = 0.0;
  EXPECT_THROW(t.validate(), DomainError);
}

TEST(TrajectoryCsv, ReadsHeaderCommentsAndUnits) {
  std::istringstream in(
      "x_mm,y_mm,z_mm,i,j,k,vf_m_per_min\n"
      "# first pass\n"
      "0,0,0,0,0,2,3\n"
      "1.5,0,0,0,0,1,6 # trailing\n");
  const auto p = read_trajectory_csv(in);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].axis, Vec3::UnitZ());
  EXPECT_DOUBLE_EQ(p[0].feedrate, 50.0);
  EXPECT_DOUBLE_EQ(p[1].feedrate, 100.0);
  EXPECT_DOUBLE_EQ(p[1].tip.x(), 1.5);
}

TEST(TrajectoryCsv, RoundTrip) {
  std::vector<ToolPosture> p = {posture(0.1, 0.2, 0.3, 33.3), posture(1.0 / 3.0, 2, 3, 17)};
  p[1].axis = Vec3(0.1, 0.2, 0.9).normalized();
  std::ostringstream out;
  write_trajectory_csv(p, out);
  std::istringstream in(out.str());
  const auto q = read_trajectory_csv(in);
  ASSERT_EQ(q.size(), 2u);
  EXPECT_NEAR((q[1].tip - p[1].tip).norm(), 0.0, 1e-15);
  EXPECT_NEAR((q[1].axis - p[1].axis).norm(), 0.0, 1e-15);
  EXPECT_NEAR(q[0].feedrate, p[0].feedrate, 1e-12);
}

TEST(TrajectoryCsv, MalformedRowsCarryLineNumbers) {
  std::istringstream bad("0,0,0,0,0,1,2\n1,0,0,0,0,1\n");
  try {
    read_trajectory_csv(bad, "traj.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("traj.csv:2"), std::string::npos);
  }
  std::istringstream zero_axis("0,0,0,0,0,0,2\n");
  EXPECT_THROW(read_trajectory_csv(zero_axis), ParseError);
  std::istringstream zero_feed("0,0,0,0,0,1,0\n");
  EXPECT_THROW(read_trajectory_csv(zero_feed), ParseError);
  EXPECT_THROW(read_trajectory_csv(std::filesystem::path("/nonexistent.csv")), IoError);
}
