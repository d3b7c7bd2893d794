#include "surftopo/quartic.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/Polynomials>

#include <algorithm>
#include <random>
#include <vector>

using namespace surftopo;

namespace {

std::vector<double> sorted(const RealRoots& r) {
  std::vector<double> v(r.begin(), r.end());
  std::sort(v.begin(), v.end());
  return v;
}

// Real roots from Eigen's companion-matrix solver.
std::vector<double> reference_roots(double b, double c, double d, double e) {
  Eigen::Matrix<double, 5, 1> coeffs;
  coeffs << e, d, c, b, 1.0;
  Eigen::PolynomialSolver<double, 4> solver(coeffs);
  std::vector<double> out;
  for (int k = 0; k < 4; ++k) {
    const auto z = solver.roots()[k];
    if (std::abs(z.imag()) < 1e-7) out.push_back(z.real());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Quadratic, DistinctRoots) {
  const auto r = sorted(solve_quadratic(-3.0, 2.0));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0], 1.0, 1e-14);
  EXPECT_NEAR(r[1], 2.0, 1e-14);
}

TEST(Quadratic, NoRealRoots) { EXPECT_EQ(solve_quadratic(0.0, 1.0).count, 0u); }

TEST(Quadratic, CancellationSafe) {
  // roots 1e8 and 1e-8
  const auto r = sorted(solve_quadratic(-(1e8 + 1e-8), 1.0));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0] / 1e-8, 1.0, 1e-12);
  EXPECT_NEAR(r[1] / 1e8, 1.0, 1e-12);
}

TEST(Cubic, LargestRoot) {
  // (x-1)(x-2)(x-3)
  EXPECT_NEAR(largest_cubic_root(-6.0, 11.0, -6.0), 3.0, 1e-12);
}

TEST(Quartic, FourKnownRoots) {
  // (u+2)(u+0.5)(u-1)(u-3)
  const double r1 = -2, r2 = -0.5, r3 = 1, r4 = 3;
  const double b = -(r1 + r2 + r3 + r4);
  const double c = r1 * r2 + r1 * r3 + r1 * r4 + r2 * r3 + r2 * r4 + r3 * r4;
  const double d = -(r1 * r2 * r3 + r1 * r2 * r4 + r1 * r3 * r4 + r2 * r3 * r4);
  const double e = r1 * r2 * r3 * r4;
  const auto r = sorted(solve_quartic(b, c, d, e));
  ASSERT_EQ(r.size(), 4u);
  EXPECT_NEAR(r[0], r1, 1e-12);
  EXPECT_NEAR(r[1], r2, 1e-12);
  EXPECT_NEAR(r[2], r3, 1e-12);
  EXPECT_NEAR(r[3], r4, 1e-12);
}

TEST(Quartic, BiquadraticNoRealRoots) { EXPECT_EQ(solve_quartic(0, 2, 0, 1.5).count, 0u); }

TEST(Quartic, TwoRealTwoComplex) {
  // (u^2 + 1)(u - 1)(u + 4)
  const auto r = sorted(solve_quartic(3.0, -3.0, 3.0, -4.0));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0], -4.0, 1e-12);
  EXPECT_NEAR(r[1], 1.0, 1e-12);
}

TEST(Quartic, MatchesCompanionMatrixOnRandomRealRoots) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 2000; ++trial) {
    double r[4];
    for (double& x : r) x = u(rng);
    std::sort(r, r + 4);
    if (r[1] - r[0] < 1e-2 || r[2] - r[1] < 1e-2 || r[3] - r[2] < 1e-2) continue;
    const double b = -(r[0] + r[1] + r[2] + r[3]);
    const double c = r[0] * r[1] + r[0] * r[2] + r[0] * r[3] + r[1] * r[2] + r[1] * r[3] +
                     r[2] * r[3];
    const double d = -(r[0] * r[1] * r[2] + r[0] * r[1] * r[3] + r[0] * r[2] * r[3] +
                       r[1] * r[2] * r[3]);
    const double e = r[0] * r[1] * r[2] * r[3];
    const auto got = sorted(solve_quartic(b, c, d, e));
    const auto ref = reference_roots(b, c, d, e);
    ASSERT_EQ(got.size(), ref.size()) << "trial " << trial;
    for (std::size_t k = 0; k < got.size(); ++k) EXPECT_NEAR(got[k], ref[k], 1e-8);
  }
}

TEST(Quartic, RootsSatisfyPolynomial) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double b = u(rng), c = u(rng), d = u(rng), e = u(rng);
    for (double x : solve_quartic(b, c, d, e)) {
      const double p = (((x + b) * x + c) * x + d) * x + e;
      const double scale = 1.0 + std::pow(std::abs(x), 4) + std::abs(b) * std::pow(std::abs(x), 3) +
                           std::abs(c) * x * x + std::abs(d * x) + std::abs(e);
      EXPECT_LT(std::abs(p) / scale, 1e-10);
    }
  }
}
