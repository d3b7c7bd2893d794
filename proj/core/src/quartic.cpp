#include "surftopo/quartic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace surftopo {

RealRoots solve_quadratic(double b, double c, double imag_tol) {
  RealRoots out;
  const double disc = b * b - 4.0 * c;
  if (disc < 0.0) {
    if (std::sqrt(-disc) * 0.5 < imag_tol) out.push(-0.5 * b);
    return out;
  }
  const double sq = std::sqrt(disc);
  // Cancellation-free form.
  const double q = -0.5 * (b + std::copysign(sq, b));
  if (q == 0.0) {
    out.push(0.0);
    return out;
  }
  const double x1 = q;
  const double x2 = c / q;
  out.push(x1);
  if (x2 != x1) out.push(x2);
  return out;
}

double largest_cubic_root(double a, double b, double c) {
  // Depress: x = y - a/3.
  const double a3 = a / 3.0;
  const double p = b - a * a3;
  const double q = 2.0 * a3 * a3 * a3 - a3 * b + c;
  double y;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    y = std::cbrt(-0.5 * q + s) + std::cbrt(-0.5 * q - s);
  } else if (p < 0.0) {
    const double rad = 2.0 * std::sqrt(-p / 3.0);
    double arg = 3.0 * q / (p * rad);
    arg = std::clamp(arg, -1.0, 1.0);
    y = rad * std::cos(std::acos(arg) / 3.0);
  } else {
    y = std::cbrt(-q);
  }
  double x = y - a3;
  for (int it = 0; it < 3; ++it) {
    const double f = ((x + a) * x + b) * x + c;
    const double df = (3.0 * x + 2.0 * a) * x + b;
    if (df == 0.0) break;
    const double step = f / df;
    x -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

namespace {

double polish_quartic(double u, double b, double c, double d, double e) {
  for (int it = 0; it < 2; ++it) {
    const double f = (((u + b) * u + c) * u + d) * u + e;
    const double df = ((4.0 * u + 3.0 * b) * u + 2.0 * c) * u + d;
    if (df == 0.0) break;
    const double step = f / df;
    // A Newton step that moves far is a sign of a near-double root; keep the
    // Ferrari estimate there.
    if (std::abs(step) > 1e-3 * std::max(1.0, std::abs(u))) break;
    u -= step;
  }
  return u;
}

}  // namespace

RealRoots solve_quartic(double b, double c, double d, double e, double imag_tol) {
  // Depress: u = y - b/4  ->  y^4 + p y^2 + q y + s = 0.
  const double b4 = b / 4.0;
  const double b2 = b4 * b4;
  const double p = c - 6.0 * b2;
  const double q = d - 2.0 * c * b4 + 8.0 * b2 * b4;
  const double s = e - d * b4 + c * b2 - 3.0 * b2 * b2;

  RealRoots ys;
  const double scale = std::max({1.0, std::abs(p), std::sqrt(std::abs(s))});
  if (std::abs(q) <= 1e-14 * scale * std::sqrt(scale)) {
    const RealRoots zs = solve_quadratic(p, s, imag_tol);
    for (double z : zs) {
      if (z >= 0.0) {
        const double y = std::sqrt(z);
        ys.push(y);
        if (y != 0.0) ys.push(-y);
      } else if (std::sqrt(-z) < imag_tol) {
        ys.push(0.0);
      }
    }
  } else {
    const double m = largest_cubic_root(p, 0.25 * p * p - s, -0.125 * q * q);
    if (m > 0.0) {
      const double sq = std::sqrt(2.0 * m);
      const double k = q / (2.0 * sq);
      for (double sign : {1.0, -1.0}) {
        const RealRoots part = solve_quadratic(-sign * sq, 0.5 * p + m + sign * k, imag_tol);
        for (double y : part) {
          if (ys.count < 4) ys.push(y);
        }
      }
    }
  }

  RealRoots out;
  for (double y : ys) out.push(polish_quartic(y - b4, b, c, d, e));
  return out;
}

}  // namespace surftopo
