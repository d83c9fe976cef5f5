#include <cmath>

#include <gtest/gtest.h>
#include <json.hpp>

#include "sk/error.hpp"
#include "sk/preprocess.hpp"
#include "sk/rng.hpp"

namespace sk {
namespace {

TraceMatrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  rng::SplitMix64 gen(seed);
  TraceMatrix m(rows, cols);
  for (double& v : m.data()) v = gen.normal();
  return m;
}

double column_variance(const TraceMatrix& m, std::size_t c) {
  long double mean = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) mean += m(r, c);
  mean /= m.rows();
  long double ss = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) ss += (m(r, c) - mean) * (m(r, c) - mean);
  return static_cast<double>(ss / (m.rows() - 1));
}

TEST(VarianceFilter, ConstantColumnDropped) {
  TraceMatrix m(4, 3, {1, 5, 0, 2, 5, 1, 3, 5, 0, 4, 5, 1});
  const ColumnMask mask = variance_filter_fit(m);
  EXPECT_EQ(mask.keep, (std::vector<bool>{true, false, true}));
  EXPECT_EQ(mask.kept_count, 2u);
}

TEST(VarianceFilter, AllVaryingIsIdentity) {
  const TraceMatrix m = gaussian(20, 5, 1);
  EXPECT_EQ(variance_filter_fit(m), ColumnMask::identity(5));
}

TEST(VarianceFilter, ThresholdIsStrict) {
  // sample variance of {0, 1} is 0.5
  TraceMatrix m(2, 2, {0, 0, 1, 3});
  const ColumnMask mask = variance_filter_fit(m, 0.5);
  EXPECT_EQ(mask.keep, (std::vector<bool>{false, true}));
}

TEST(VarianceFilter, AllDroppedIsDegenerate) {
  TraceMatrix m(3, 2, {1, 1, 1, 1, 1, 1});
  EXPECT_THROW(variance_filter_fit(m), DegenerateData);
}

TEST(ApplyMask, IdentityAndSubset) {
  TraceMatrix m(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(apply_mask(m, ColumnMask::identity(3)), m);
  ColumnMask mask{{true, false, true}, 2};
  EXPECT_EQ(apply_mask(m, mask), TraceMatrix(2, 2, {1, 3, 4, 6}));
  EXPECT_THROW(apply_mask(m, ColumnMask::identity(2)), ShapeError);
}

TEST(Pca, LineDataFirstComponent) {
  TraceMatrix m(5, 2);
  for (int i = 0; i < 5; ++i) {
    m(i, 0) = i - 2.0 + 10.0;
    m(i, 1) = 2.0 * (i - 2.0) - 3.0;
  }
  const PcaModel p = pca_fit(m, 2);
  // covariance of (x, 2x) has eigenvalues 5 var(x) and 0, var(x) = 2.5
  EXPECT_NEAR(p.component(0)[0], 1.0 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(p.component(0)[1], 2.0 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(p.explained_variance[0], 12.5, 1e-10);
  EXPECT_NEAR(p.explained_variance[1], 0.0, 1e-12);
}

TEST(Pca, FullRankExplainsTotalVariance) {
  const TraceMatrix m = gaussian(6, 8, 2);
  const PcaModel p = pca_fit(m, 5);
  double total = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c) total += column_variance(m, c);
  double explained = 0.0;
  for (double v : p.explained_variance) explained += v;
  EXPECT_NEAR(explained, total, 1e-10 * total);
  for (std::size_t i = 1; i < p.k; ++i) EXPECT_GE(p.explained_variance[i - 1], p.explained_variance[i]);
}

TEST(Pca, ComponentsAreOrthonormal) {
  const PcaModel p = pca_fit(gaussian(40, 6, 3), 4);
  for (std::size_t a = 0; a < p.k; ++a) {
    for (std::size_t b = 0; b < p.k; ++b) {
      double dot = 0.0;
      for (std::size_t j = 0; j < p.dim; ++j) dot += p.component(a)[j] * p.component(b)[j];
      EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(Pca, InvalidK) {
  const TraceMatrix m = gaussian(5, 3, 4);
  EXPECT_THROW(pca_fit(m, 0), ShapeError);
  EXPECT_THROW(pca_fit(m, 4), ShapeError);
  EXPECT_THROW(pca_fit(gaussian(3, 8, 4), 3), ShapeError);
}

TEST(PcaTransform, MeanMapsToZero) {
  const TraceMatrix m = gaussian(30, 4, 5);
  const PcaModel p = pca_fit(m, 3);
  TraceMatrix mean_row(1, 4, p.mean);
  const TraceMatrix z = pca_transform(p, mean_row);
  for (double v : z.data()) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(PcaTransform, PreservesDistancesAtFullRank) {
  const TraceMatrix m = gaussian(5, 3, 6);
  const PcaModel p = pca_fit(m, 3);
  const TraceMatrix z = pca_transform(p, m);
  for (std::size_t a = 0; a < 5; ++a) {
    for (std::size_t b = 0; b < 5; ++b) {
      double d0 = 0.0, d1 = 0.0;
      for (std::size_t j = 0; j < 3; ++j) d0 += std::pow(m(a, j) - m(b, j), 2);
      for (std::size_t j = 0; j < 3; ++j) d1 += std::pow(z(a, j) - z(b, j), 2);
      EXPECT_NEAR(d0, d1, 1e-10);
    }
  }
}

TEST(PcaTransform, ColumnMismatch) {
  const PcaModel p = pca_fit(gaussian(10, 3, 7), 2);
  EXPECT_THROW(pca_transform(p, gaussian(2, 4, 7)), ShapeError);
}

TEST(PcaTransform, SerialMatchesParallel) {
  const TraceMatrix m = gaussian(300, 12, 8);
  const PcaModel p = pca_fit(m, 6);
  EXPECT_EQ(pca_transform(p, m, Exec::serial), pca_transform(p, m, Exec::parallel));
}

TEST(Pca, JsonRoundTrip) {
  const PcaModel p = pca_fit(gaussian(10, 3, 9), 2);
  const nlohmann::json j = p;
  EXPECT_EQ(j.get<PcaModel>(), p);
  const ColumnMask mask{{true, false, true}, 2};
  EXPECT_EQ(nlohmann::json(mask).get<ColumnMask>(), mask);
}

TEST(Zscore, ClosedForm) {
  const std::vector<double> v{1, 2, 3};
  const auto z = zscore(v);
  EXPECT_DOUBLE_EQ(z[0], -1.0);
  EXPECT_DOUBLE_EQ(z[1], 0.0);
  EXPECT_DOUBLE_EQ(z[2], 1.0);
}

TEST(Zscore, Idempotent) {
  const TraceMatrix g = gaussian(50, 1, 10);
  const auto z = zscore(g.data());
  const auto zz = zscore(z);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(z[i], zz[i], 1e-12);
}

TEST(Zscore, ConstantIsDegenerate) {
  const std::vector<double> v{5, 5, 5};
  EXPECT_THROW(zscore(v), DegenerateData);
}

}  // namespace
}  // namespace sk
