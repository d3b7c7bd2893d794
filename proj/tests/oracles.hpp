#pragma once

// Reference computations shared by the unit tests and the acceptance
// driver. None of them call into the library's intersection or areal code.

#include "surftopo/geometry.hpp"
#include "surftopo/surface.hpp"
#include "surftopo/tool.hpp"
#include "surftopo/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

namespace surftopo::oracle {

// Distance from a tool-frame point to the bull-nose solid, from its
// meridian section: a barrel rectangle above z = r and a disk swept by a
// ball of radius r below.
inline double solid_distance(double rho, double z, const ToolDefinition& t) {
  if (z >= t.r) return std::hypot(std::max(rho - t.R, 0.0), std::max(z - t.flute_height, 0.0));
  return std::max(0.0, std::hypot(std::max(rho - (t.R - t.r), 0.0), z - t.r) - t.r);
}

// Lowest parameter c at which anchor + c n enters the tool, found by a
// ternary search on the (convex) distance followed by bisection. Distances
// up to touch_tol count as contact so that tangent lines are accepted.
inline std::optional<double> lowest_entry(const Vec3& anchor, const Vec3& n, const ToolState& s,
                                          const ToolDefinition& t, double touch_tol = 1e-12) {
  const Vec3 a = s.axis.normalized();
  auto g = [&](double c) {
    const Vec3 p = anchor + c * n - s.tip;
    const double z = p.dot(a);
    return solid_distance((p - z * a).norm(), z, t);
  };
  double lo = -40.0, hi = 40.0;
  std::optional<double> inside;
  for (int k = 0; k < 200 && !inside; ++k) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    const double g1 = g(m1), g2 = g(m2);
    if (g1 <= 0.0) inside = m1;
    else if (g2 <= 0.0) inside = m2;
    else if (g1 <= g2) hi = m2;
    else lo = m1;
  }
  if (!inside) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > touch_tol) return std::nullopt;
    inside = mid;
  }
  double out = -40.0, in = *inside;
  for (int k = 0; k < 100; ++k) {
    const double mid = 0.5 * (out + in);
    (g(mid) > touch_tol ? out : in) = mid;
  }
  return in;
}

// Envelope-mode cut offsets by brute force over every (state, cell) pair.
inline std::vector<double> brute_force_offsets(const LineNet& fresh,
                                               const std::vector<SampledToolState>& states,
                                               const ToolDefinition& tool) {
  std::vector<double> c = fresh.offsets();
  for (const auto& s : states) {
    for (std::size_t idx = 0; idx < fresh.size(); ++idx) {
      const auto e = lowest_entry(fresh.anchor(idx), fresh.normal(idx), s.state, tool);
      if (e) c[idx] = std::min(c[idx], *e);
    }
  }
  return c;
}

// Dominant period of a uniformly sampled profile: the strongest Fourier
// component over [min_period, max_period], refined by golden-section search
// on the continuous spectrum. A least-squares line is removed first.
inline double dominant_period(std::vector<double> h, double dx, double min_period, double max_period) {
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sx += k; sy += h[k]; sxx += double(k) * k; sxy += k * h[k];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  for (std::size_t k = 0; k < n; ++k) h[k] -= icpt + slope * k;
  auto power = [&](double f) {
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += h[k] * std::polar(1.0, -2.0 * kPi * f * dx * k);
    return std::norm(acc);
  };
  const double fmin = 1.0 / max_period, fmax = 1.0 / min_period;
  const double df = 0.25 / (n * dx);
  double best_f = fmin, best_p = -1.0;
  for (double f = fmin; f <= fmax; f += df) {
    const double p = power(f);
    if (p > best_p) { best_p = p; best_f = f; }
  }
  double a = best_f - df, b = best_f + df;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (power(c) > power(d)) b = d; else a = c;
  }
  return 1.0 / (0.5 * (a + b));
}

}  // namespace surftopo::oracle
