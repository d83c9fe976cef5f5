#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "sk/diststat.hpp"
#include "sk/kernels.hpp"
#include "sk/parallel.hpp"
#include "sk/rng.hpp"
#include "sk/surprise.hpp"

namespace sk {
namespace {

TraceMatrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  rng::SplitMix64 gen(seed);
  TraceMatrix m(rows, cols);
  for (double& v : m.data()) v = gen.normal();
  return m;
}

class ThreadedKernels : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    saved_ = max_threads();
    set_num_threads(GetParam());
  }
  void TearDown() override { set_num_threads(saved_); }

  int saved_ = 1;
};

TEST_P(ThreadedKernels, KdeScores) {
  const KdeModel kde = kde_fit(gaussian(120, 5, 1));
  const TraceMatrix q = gaussian(257, 5, 2);
  EXPECT_EQ(lsa_scores(kde, q, Exec::serial), lsa_scores(kde, q, Exec::parallel));
}

TEST_P(ThreadedKernels, GaussianGrid) {
  const auto s = gaussian(333, 1, 3).data();
  std::vector<double> xs(1000);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = -4.0 + 8.0 * i / 999.0;
  std::vector<double> a(xs.size()), b(xs.size());
  kernels::serial::gaussian_grid(s, 0.3, xs, a);
  kernels::omp::gaussian_grid(s, 0.3, xs, b);
  EXPECT_EQ(a, b);
}

TEST_P(ThreadedKernels, PermutationCount) {
  const auto a = gaussian(60, 1, 4).data();
  auto b = gaussian(60, 1, 5).data();
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += 0.2 * a[i];
  EXPECT_EQ(permutation_pvalue(a, b, 3001, 9, Exec::serial), permutation_pvalue(a, b, 3001, 9, Exec::parallel));
}

TEST_P(ThreadedKernels, Projection) {
  const TraceMatrix m = gaussian(501, 9, 6);
  const PcaModel p = pca_fit(m, 4);
  EXPECT_EQ(pca_transform(p, m, Exec::serial), pca_transform(p, m, Exec::parallel));
}

INSTANTIATE_TEST_SUITE_P(Threads, ThreadedKernels, ::testing::Values(1, 2, 4));

TEST(Rng, DeriveSeparatesKeys) {
  EXPECT_NE(rng::derive(1, {0, 1}), rng::derive(1, {1, 0}));
  EXPECT_NE(rng::derive(1, {0}), rng::derive(2, {0}));
  EXPECT_EQ(rng::derive(7, {3, 4}), rng::derive(7, {3, 4}));
}

TEST(Rng, UniformAndNormalMoments) {
  rng::SplitMix64 gen(123);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = gen.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = gen.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.01);
}

TEST(Rng, ShuffleIsPermutation) {
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  rng::SplitMix64 gen(5);
  rng::shuffle(std::span(v), gen);
  EXPECT_FALSE(std::is_sorted(v.begin(), v.end()));
  std::sort(v.begin(), v.end());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(v[i], i);
}

}  // namespace
}  // namespace sk
