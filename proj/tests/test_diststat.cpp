#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <gtest/gtest.h>

#include "sk/diststat.hpp"
#include "sk/error.hpp"
#include "sk/rng.hpp"
#include "sk/special.hpp"

namespace sk {
namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed, double mean = 0.0, double sd = 1.0) {
  rng::SplitMix64 gen(seed);
  std::vector<double> v(n);
  for (double& x : v) x = mean + sd * gen.normal();
  return v;
}

double trapezoid(const std::vector<double>& xs, const std::vector<double>& ys) {
  double s = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) s += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
  return s;
}

TEST(Special, IncompleteBetaMatchesBoost) {
  for (double a : {0.5, 1.0, 2.5, 9.0, 40.0}) {
    for (double b : {0.5, 1.0, 3.0, 17.0}) {
      for (double x : {0.0, 1e-6, 0.1, 0.37, 0.5, 0.9, 0.999, 1.0}) {
        EXPECT_NEAR(special::incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-12)
            << a << ' ' << b << ' ' << x;
      }
    }
  }
}

TEST(Special, StudentTTwoSidedMatchesBoost) {
  for (double df : {1.0, 3.0, 7.5, 38.0, 500.0}) {
    boost::math::students_t dist(df);
    for (double t : {0.0, 0.3, 1.0, 2.1, 5.0, 40.0}) {
      const double want = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
      EXPECT_NEAR(special::student_t_two_sided(t, df), want, 1e-12 + 1e-9 * want);
      EXPECT_DOUBLE_EQ(special::student_t_two_sided(-t, df), special::student_t_two_sided(t, df));
    }
  }
}

TEST(KdeCurve, IntegratesToOne) {
  const auto c = kde_curve_1d(normals(100, 1), 500);
  EXPECT_EQ(c.xs.size(), 500u);
  EXPECT_NEAR(trapezoid(c.xs, c.ys), 1.0, 1e-12);
}

TEST(KdeCurve, SymmetricSamples) {
  const std::vector<double> s{-1.0, 1.0};
  const auto c = kde_curve_1d(s, 201);
  for (std::size_t i = 0; i < c.ys.size(); ++i) EXPECT_NEAR(c.ys[i], c.ys[c.ys.size() - 1 - i], 1e-9);
}

TEST(KdeCurve, UnimodalMatchesKernelSum) {
  const auto s = normals(200, 2);
  const auto c = kde_curve_1d(s, 400);
  const double h = scott_bandwidth_1d(s);
  std::vector<double> brute(c.xs.size());
  for (std::size_t i = 0; i < c.xs.size(); ++i) {
    long double acc = 0;
    for (double v : s) acc += std::exp(-0.5L * std::pow((c.xs[i] - v) / h, 2));
    brute[i] = static_cast<double>(acc);
  }
  const double z = trapezoid(c.xs, brute);
  std::size_t maxima = 0;
  for (std::size_t i = 0; i < c.ys.size(); ++i) {
    EXPECT_NEAR(c.ys[i], brute[i] / z, 1e-10);
    const bool left = i == 0 || c.ys[i] > c.ys[i - 1];
    const bool right = i + 1 == c.ys.size() || c.ys[i] > c.ys[i + 1];
    maxima += left && right;
  }
  EXPECT_EQ(maxima, 1u);
}

TEST(KdeCurve, GridTooSmall) {
  EXPECT_THROW(kde_curve_1d(normals(10, 3), 15), InvalidArgument);
  EXPECT_NO_THROW(kde_curve_1d(normals(10, 3), 16));
}

TEST(KdeCurve, SerialEqualsParallel) {
  const auto s = normals(300, 4);
  EXPECT_EQ(kde_curve_1d(s, 1000, Exec::serial).ys, kde_curve_1d(s, 1000, Exec::parallel).ys);
}

TEST(Jsd, IdenticalIsZero) {
  const auto a = normals(80, 5);
  EXPECT_NEAR(js_divergence(a, a).jsd, 0.0, 1e-9);
  EXPECT_NEAR(js_divergence(a, a, false).jsd, 0.0, 1e-9);
}

TEST(Jsd, DisjointSupportNearOne) {
  const auto a = normals(100, 6);
  const auto b = normals(100, 7, 1000.0);
  const auto r = js_divergence(a, b, false);
  EXPECT_GE(r.jsd, 0.99);
  EXPECT_LE(r.jsd, 1.0);
  EXPECT_FALSE(r.standardized);
}

TEST(Jsd, SymmetricAndBounded) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = normals(50, s, 0.0, 1.0);
    const auto b = normals(70, s + 1000, 0.5 * s, 1.0 + s);
    for (bool z : {true, false}) {
      const double ab = js_divergence(a, b, z).jsd;
      EXPECT_EQ(ab, js_divergence(b, a, z).jsd);
      EXPECT_GE(ab, 0.0);
      EXPECT_LE(ab, 1.0);
    }
  }
}

TEST(Jsd, StandardizationRemovesLocationAndScale) {
  const auto a = normals(100, 8);
  auto b = a;
  for (double& v : b) v = 3.0 * v + 50.0;
  EXPECT_NEAR(js_divergence(a, b, true).jsd, 0.0, 1e-9);
  EXPECT_GT(js_divergence(a, b, false).jsd, 0.9);
}

TEST(Ranks, AverageTies) {
  const std::vector<double> v{10, 20, 20, 5};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{2, 3.5, 3.5, 1}));
}

TEST(Spearman, ClosedFormCases) {
  const std::vector<double> a{1, 2, 3};
  EXPECT_EQ(spearman(a, std::vector<double>{10, 20, 30}).rho, 1.0);
  EXPECT_EQ(spearman(a, std::vector<double>{3, 2, 1}).rho, -1.0);
  const std::vector<double> x{1, 2, 3, 4, 5}, y{1, 3, 2, 5, 4};
  EXPECT_NEAR(spearman(x, y).rho, 1.0 - 6.0 * 4.0 / (5.0 * 24.0), 1e-15);
}

TEST(Spearman, ParametricPValueMatchesBoost) {
  const auto a = normals(30, 9);
  auto b = normals(30, 10);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += a[i];
  const auto r = spearman(a, b);
  const double t = r.rho * std::sqrt(28.0 / (1.0 - r.rho * r.rho));
  const double want = 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t(28.0), std::fabs(t)));
  EXPECT_NEAR(r.p_parametric, want, 1e-10);
}

TEST(Spearman, Errors) {
  const std::vector<double> a{1, 2, 3}, c{2, 2, 2};
  EXPECT_THROW(spearman(a, std::vector<double>{1, 2}), ShapeError);
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InsufficientData);
  EXPECT_THROW(spearman(a, c), DegenerateData);
}

TEST(Permutation, MonotoneGivesMinimumP) {
  std::vector<double> a(20), b(20);
  for (int i = 0; i < 20; ++i) {
    a[i] = i;
    b[i] = 3.0 * i + 1.0;
  }
  const double p = permutation_pvalue(a, b, 10000, 7);
  EXPECT_EQ(p, 1.0 / 10001.0);
  // the quoted 9.9e-5 is 1/10001 = 9.999e-5 truncated to two digits
  EXPECT_EQ(std::floor(p * 1e6), 99.0);
}

TEST(Permutation, IndependentNoiseIsCalibrated) {
  int above = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto a = normals(50, 2 * s);
    const auto b = normals(50, 2 * s + 1);
    above += permutation_pvalue(a, b, 500, s) > 0.05;
  }
  EXPECT_GE(above, 90);
}

TEST(Permutation, ZeroPermutationsRejected) {
  const std::vector<double> a{1, 2, 3}, b{1, 3, 2};
  EXPECT_THROW(permutation_pvalue(a, b, 0, 1), InvalidArgument);
}

TEST(Permutation, SerialEqualsParallelAndSeeded) {
  const auto a = normals(40, 11);
  auto b = normals(40, 12);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += 0.3 * a[i];
  const double s = permutation_pvalue(a, b, 2000, 5, Exec::serial);
  EXPECT_EQ(s, permutation_pvalue(a, b, 2000, 5, Exec::parallel));
  EXPECT_EQ(s, permutation_pvalue(a, b, 2000, 5, Exec::serial));
}

TEST(Strength, Thresholds) {
  CorrelationResult r;
  r.rho = 0.886;
  r.p_parametric = 1e-10;
  EXPECT_EQ(strength_label(r), Strength::Strong);
  r.rho = 0.69;
  r.p_parametric = 0.001;
  EXPECT_EQ(strength_label(r), Strength::NotStrong);
  r.rho = 0.9;
  r.p_parametric = 0.2;
  EXPECT_EQ(strength_label(r), Strength::NotStrong);
  EXPECT_STREQ(to_string(Strength::Strong), "strong");
}

}  // namespace
}  // namespace sk
