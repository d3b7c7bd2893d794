#pragma once

#include <array>
#include <cstddef>

namespace surftopo {

// Real roots of a polynomial, unordered, with multiplicity collapsed.
struct RealRoots {
  std::array<double, 4> values{};
  std::size_t count = 0;

  void push(double v) { values[count++] = v; }
  const double* begin() const { return values.data(); }
  const double* end() const { return values.data() + count; }
};

// Real roots of x^2 + b x + c. Complex pairs whose imaginary part is below
// `imag_tol` are reported as a (double) real root.
RealRoots solve_quadratic(double b, double c, double imag_tol = 1e-10);

// Largest real root of x^3 + a x^2 + b x + c, Newton-polished.
double largest_cubic_root(double a, double b, double c);

// Real roots of u^4 + b u^3 + c u^2 + d u + e (Ferrari via the resolvent
// cubic). Each root is polished by Newton steps on the original quartic.
RealRoots solve_quartic(double b, double c, double d, double e, double imag_tol = 1e-10);

}  // namespace surftopo
