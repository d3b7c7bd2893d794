#include "surftopo/trajectory.hpp"

#include "surftopo/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace surftopo {

void Trajectory::validate() const {
  if (postures.size() < 2) throw DomainError("trajectory: at least 2 postures are required");
  if (!(spindle_speed > 0.0)) throw DomainError("trajectory: spindle speed must be positive");
  for (std::size_t i = 0; i < postures.size(); ++i) {
    const ToolPosture& p = postures[i];
    if (std::abs(p.axis.norm() - 1.0) > 1e-9) {
      throw DomainError("trajectory: posture " + std::to_string(i) + " axis is not unit length");
    }
    if (!(p.feedrate > 0.0)) {
      throw DomainError("trajectory: posture " + std::to_string(i) + " feedrate must be positive");
    }
    if (i > 0) {
      const ToolPosture& q = postures[i - 1];
      if (segment_length(q, p) <= 1e-9 && (q.axis - p.axis).norm() <= 1e-12) {
        throw DomainError("trajectory: postures " + std::to_string(i - 1) + " and " +
                          std::to_string(i) + " coincide");
      }
    }
  }
}

double segment_length(const ToolPosture& from, const ToolPosture& to) {
  return (to.tip - from.tip).norm();
}

double segment_duration(double delta_l, double vf_from, double vf_to) {
  if (!(delta_l >= 0.0)) throw DomainError("segment_duration: negative length");
  if (!(vf_from + vf_to > 0.0)) throw DomainError("segment_duration: non-positive mean feedrate");
  return delta_l / (0.5 * (vf_from + vf_to));
}

double advance_spindle_angle(double alpha, double omega, double dt) { return alpha + omega * dt; }

namespace {

SampledToolState make_state(const Vec3& tip, const Vec3& axis, double alpha, double feedrate,
                            double time) {
  SampledToolState s;
  s.state.tip = tip;
  s.state.axis = axis;
  s.state.spindle_angle = wrap_angle(alpha);
  s.alpha = alpha;
  s.feedrate = feedrate;
  s.time = time;
  s.window_start = alpha;
  return s;
}

}  // namespace

SegmentSamples sample_segment(const ToolPosture& from, const ToolPosture& to, double alpha_from,
                              double omega, double d_alpha, double time_from) {
  if (!(d_alpha > 0.0)) throw DomainError("sample_segment: d_alpha must be positive");
  if (!(omega > 0.0)) throw DomainError("sample_segment: spindle speed must be positive");

  SegmentSamples out;
  const double dl = segment_length(from, to);
  const double duration = segment_duration(dl, from.feedrate, to.feedrate);
  const double alpha_to = advance_spindle_angle(alpha_from, omega, duration);
  out.alpha_end = alpha_to;
  out.time_end = time_from + duration;

  const double dt = d_alpha / omega;
  const auto n_max = static_cast<long long>(std::floor((alpha_to - alpha_from) / d_alpha));
  out.undersampled = n_max < 1;

  const Vec3 chord = to.tip - from.tip;
  const Vec3 unit = dl > 0.0 ? Vec3(chord / dl) : Vec3::Zero();
  const double accel = duration > 0.0 ? (to.feedrate - from.feedrate) / duration : 0.0;

  out.states.reserve(static_cast<std::size_t>(std::max(0LL, n_max)) + 1);
  bool closed = false;
  for (long long n = 1; n <= n_max; ++n) {
    const double nd = static_cast<double>(n);
    const double elapsed = nd * dt;
    const double vf = from.feedrate + accel * elapsed;
    double s = 0.5 * (vf + from.feedrate) * elapsed;
    s = std::min(s, dl);
    const double lambda = dl > 0.0 ? s / dl : 1.0;
    const Vec3 axis = ((1.0 - lambda) * from.axis + lambda * to.axis).normalized();
    const double alpha = alpha_from + nd * d_alpha;
    out.states.push_back(make_state(from.tip + unit * s, axis, alpha, vf, time_from + elapsed));
    if (n == n_max && std::abs(alpha - alpha_to) <= 1e-12 * std::max(1.0, std::abs(alpha_to))) {
      // The last grid sample is the end posture.
      out.states.back().state.tip = to.tip;
      out.states.back().state.axis = to.axis;
      out.states.back().feedrate = to.feedrate;
      closed = true;
    }
  }
  if (!closed) {
    out.states.push_back(make_state(to.tip, to.axis, alpha_to, to.feedrate, out.time_end));
  }
  for (std::size_t k = 0; k + 1 < out.states.size(); ++k) {
    out.states[k].window_end = out.states[k + 1].alpha;
  }
  out.states.back().window_end = out.states.back().alpha + d_alpha;
  return out;
}

std::vector<SampledToolState> sample_trajectory(const Trajectory& traj, double d_alpha,
                                                double alpha_start, SamplingStats* stats) {
  traj.validate();
  std::vector<SampledToolState> states;
  double alpha = alpha_start;
  double time = 0.0;
  SamplingStats local;
  for (std::size_t i = 0; i + 1 < traj.postures.size(); ++i) {
    SegmentSamples seg = sample_segment(traj.postures[i], traj.postures[i + 1], alpha,
                                        traj.spindle_speed, d_alpha, time);
    if (!states.empty() && !seg.states.empty()) {
      states.back().window_end = seg.states.front().alpha;
    }
    states.insert(states.end(), seg.states.begin(), seg.states.end());
    alpha = seg.alpha_end;
    time = seg.time_end;
    ++local.segments;
    if (seg.undersampled) ++local.undersampled_segments;
  }
  local.total_time = time;
  local.alpha_end = alpha;
  if (stats) *stats = local;
  return states;
}

namespace {

bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

std::vector<ToolPosture> read_trajectory_csv(std::istream& in, const std::string& source) {
  std::vector<ToolPosture> postures;
  std::string line;
  std::size_t line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    double v[7];
    bool numeric = fields.size() == 7;
    for (std::size_t k = 0; numeric && k < 7; ++k) numeric = parse_double(fields[k], v[k]);
    if (!numeric) {
      double dummy;
      if (first_data_line && !fields.empty() && !parse_double(fields[0], dummy)) {
        first_data_line = false;  // header row
        continue;
      }
      throw ParseError(source + ":" + std::to_string(line_no) +
                       ": expected 7 numeric fields x,y,z,i,j,k,vf");
    }
    first_data_line = false;
    ToolPosture p;
    p.tip = Vec3(v[0], v[1], v[2]);
    const Vec3 axis(v[3], v[4], v[5]);
    if (axis.norm() < 1e-9) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": zero tool axis");
    }
    p.axis = axis.normalized();
    if (!(v[6] > 0.0)) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": feedrate must be positive");
    }
    p.feedrate = v[6] * kMetersPerMinuteToMmPerSecond;
    postures.push_back(p);
  }
  return postures;
}

std::vector<ToolPosture> read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory '" + path.string() + "'");
  return read_trajectory_csv(in, path.string());
}

void write_trajectory_csv(const std::vector<ToolPosture>& postures, std::ostream& out) {
  out << "x_mm,y_mm,z_mm,i,j,k,vf_m_per_min\n";
  out.precision(17);
  for (const ToolPosture& p : postures) {
    out << p.tip.x() << ',' << p.tip.y() << ',' << p.tip.z() << ',' << p.axis.x() << ','
        << p.axis.y() << ',' << p.axis.z() << ',' << p.feedrate / kMetersPerMinuteToMmPerSecond
        << '\n';
  }
}

}  // namespace surftopo
