#pragma once

#include "surftopo/geometry.hpp"
#include "surftopo/tool.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace surftopo {

// Programmed posture: tool tip, unit axis and local feedrate (mm/s).
struct ToolPosture {
  Vec3 tip = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double feedrate = 0.0;
};

struct Trajectory {
  std::vector<ToolPosture> postures;
  double spindle_speed = 0.0;  // rad/s

  void validate() const;
};

// Spindle-synchronised tool state produced by the sampler.
struct SampledToolState {
  ToolState state;          // spindle_angle wrapped to [0, 2pi)
  double alpha = 0.0;       // unwrapped spindle angle, rad
  double feedrate = 0.0;    // mm/s
  double time = 0.0;        // s
  double window_start = 0.0;  // unwrapped, rad
  double window_end = 0.0;    // unwrapped, rad; swept until the next sample

  double window_length() const { return window_end - window_start; }
};

inline constexpr double kMetersPerMinuteToMmPerSecond = 1000.0 / 60.0;
inline constexpr double kRpmToRadPerSecond = kTwoPi / 60.0;

double segment_length(const ToolPosture& from, const ToolPosture& to);

// Time to travel delta_l with a feedrate varying linearly from vf_from to
// vf_to (mean-velocity form).
double segment_duration(double delta_l, double vf_from, double vf_to);

double advance_spindle_angle(double alpha, double omega, double dt);

struct SegmentSamples {
  std::vector<SampledToolState> states;
  double alpha_end = 0.0;
  double time_end = 0.0;
  bool undersampled = false;  // segment shorter than one angular step
};

// Samples the elementary trajectory between two postures at spindle angles
// alpha_from + N*d_alpha, N = 1..floor((alpha_to - alpha_from)/d_alpha), and
// always closes with the end posture. `time_from` threads the clock.
SegmentSamples sample_segment(const ToolPosture& from, const ToolPosture& to, double alpha_from,
                              double omega, double d_alpha, double time_from = 0.0);

struct SamplingStats {
  std::size_t segments = 0;
  std::size_t undersampled_segments = 0;
  double total_time = 0.0;
  double alpha_end = 0.0;
};

// Folds sample_segment over consecutive postures, threading alpha and time,
// and fills in each state's tooth window.
std::vector<SampledToolState> sample_trajectory(const Trajectory& traj, double d_alpha,
                                                double alpha_start = 0.0,
                                                SamplingStats* stats = nullptr);

// CSV `x_mm,y_mm,z_mm,i,j,k,vf_m_per_min`; `#` comments; optional header row.
std::vector<ToolPosture> read_trajectory_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<ToolPosture> read_trajectory_csv(const std::filesystem::path& path);
void write_trajectory_csv(const std::vector<ToolPosture>& postures, std::ostream& out);

}  // namespace surftopo
