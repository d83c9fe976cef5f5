#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sk/error.hpp"
#include "sk/rng.hpp"
#include "sk/surprise.hpp"
#include "test_util.hpp"

namespace sk {
namespace {

TraceMatrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed, double shift = 0.0) {
  rng::SplitMix64 gen(seed);
  TraceMatrix m(rows, cols);
  for (double& v : m.data()) v = gen.normal() + shift;
  return m;
}

TEST(KdeFit, ScottBandwidthTwoPoints) {
  const KdeModel kde = kde_fit(TraceMatrix(2, 1, {0.0, 1.0}));
  EXPECT_NEAR(kde.scott_factor(), std::pow(2.0, -0.2), 1e-15);
  EXPECT_NEAR(kde.bandwidth()[0], std::pow(2.0, -0.4) * 0.5, 1e-12);
  EXPECT_NEAR(kde.bandwidth()[0], 0.37893, 1e-5);
}

TEST(KdeFit, DuplicatePointsAreSingular) {
  EXPECT_THROW(kde_fit(TraceMatrix(2, 1, {3.0, 3.0})), SingularCovariance);
}

TEST(KdeFit, CollinearPointsAreSingular) {
  TraceMatrix m(4, 2, {0, 0, 1, 2, 2, 4, 3, 6});
  EXPECT_THROW(kde_fit(m), SingularCovariance);
}

TEST(KdeFit, SinglePointIsInsufficient) {
  EXPECT_THROW(kde_fit(TraceMatrix(1, 1, {3.0})), InsufficientData);
}

TEST(KdeFit, BandwidthScalesQuadratically) {
  const TraceMatrix m = gaussian(30, 3, 1);
  TraceMatrix scaled = m;
  for (double& v : scaled.data()) v *= 3.0;
  const KdeModel a = kde_fit(m);
  const KdeModel b = kde_fit(scaled);
  for (std::size_t i = 0; i < a.bandwidth().size(); ++i) {
    EXPECT_NEAR(b.bandwidth()[i], 9.0 * a.bandwidth()[i], 1e-12 * (1.0 + std::fabs(b.bandwidth()[i])));
  }
}

TEST(Lsa, HandDerivedTwoPointValue) {
  const KdeModel kde = kde_fit(TraceMatrix(2, 1, {0.0, 1.0}));
  const double h = std::pow(2.0, -0.4) * 0.5;
  const double f = std::exp(-0.25 / (2.0 * h)) / std::sqrt(2.0 * std::numbers::pi * h);
  const double x = 0.5;
  EXPECT_NEAR(f, 0.4660, 1e-4);
  EXPECT_NEAR(lsa_score(kde, std::span(&x, 1)), -std::log(f), 1e-9);
  EXPECT_NEAR(lsa_score(kde, std::span(&x, 1)), 0.7636, 1e-4);
}

TEST(Lsa, SymmetricAroundMidpoint) {
  const KdeModel kde = kde_fit(TraceMatrix(2, 1, {0.0, 1.0}));
  const double a = 0.2, b = 0.8;
  EXPECT_NEAR(lsa_score(kde, std::span(&a, 1)), lsa_score(kde, std::span(&b, 1)), 1e-12);
}

TEST(Lsa, FarPointIsLargeAndFinite) {
  const KdeModel kde = kde_fit(TraceMatrix(2, 1, {0.0, 1.0}));
  const double x = 1e6;
  const double s = lsa_score(kde, std::span(&x, 1));
  EXPECT_TRUE(std::isfinite(s));
  EXPECT_GT(s, 1e11);
}

TEST(Lsa, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t d = 1 + seed % 5;
    const TraceMatrix pts = gaussian(20 + 8 * seed, d, seed);
    const KdeModel kde = kde_fit(pts);
    const TraceMatrix q = gaussian(5, d, seed + 100, 0.5);
    for (std::size_t i = 0; i < q.rows(); ++i) {
      const double want = static_cast<double>(oracle::brute_force_lsa(pts, q.row(i)));
      EXPECT_NEAR(lsa_score(kde, q.row(i)), want, 1e-9 * std::fabs(want));
    }
  }
}

TEST(Lsa, QueryDimensionMismatch) {
  const KdeModel kde = kde_fit(gaussian(10, 2, 1));
  const std::vector<double> x{0, 0, 0};
  EXPECT_THROW(lsa_score(kde, x), ShapeError);
}

TEST(Lsa, BatchSerialEqualsParallel) {
  const KdeModel kde = kde_fit(gaussian(200, 4, 2));
  const TraceMatrix q = gaussian(300, 4, 3);
  EXPECT_EQ(lsa_scores(kde, q, Exec::serial), lsa_scores(kde, q, Exec::parallel));
}

TEST(DensityModel, ShapeContract) {
  const DensityModel m = fit_density_model(gaussian(200, 32, 4), DensityConfig{1e-5, 8}, "ref");
  EXPECT_EQ(m.kde.d(), 8u);
  EXPECT_EQ(m.input_dim(), 32u);
  EXPECT_EQ(m.id, "ref");
}

TEST(DensityModel, AutoK) {
  const DensityModel m = fit_density_model(gaussian(6, 10, 4), DensityConfig{1e-5, 0});
  EXPECT_EQ(m.pca.k, 5u);
}

TEST(DensityModel, KTooLarge) {
  EXPECT_THROW(fit_density_model(gaussian(5, 10, 4), DensityConfig{1e-5, 5}), ShapeError);
}

TEST(DensityModel, RefitIsDeterministic) {
  const TraceMatrix t = gaussian(80, 10, 5);
  const DensityModel a = fit_density_model(t, DensityConfig{1e-5, 4});
  const DensityModel b = fit_density_model(t, DensityConfig{1e-5, 4});
  EXPECT_EQ(a.pca, b.pca);
  EXPECT_EQ(a.kde.bandwidth(), b.kde.bandwidth());
  EXPECT_EQ(a.kde.points(), b.kde.points());
}

TEST(DensityModel, ShiftedClusterIsMoreSurprising) {
  const TraceMatrix t = gaussian(150, 6, 6);
  const DensityModel m = fit_density_model(t, DensityConfig{1e-5, 4});
  const auto own = score_batch(m, t).values;
  const auto far = score_batch(m, gaussian(150, 6, 7, 10.0)).values;
  double mo = 0, mf = 0;
  for (double v : own) mo += v;
  for (double v : far) mf += v;
  EXPECT_LT(mo / own.size(), mf / far.size());
}

TEST(DensityModel, DuplicatingPointLowersItsLsa) {
  const TraceMatrix t = gaussian(40, 2, 8);
  const KdeModel base = kde_fit(t);
  std::vector<std::size_t> rows(t.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  rows.push_back(0);
  const KdeModel dup = kde_fit(t.select_rows(rows));
  EXPECT_LT(lsa_score(dup, t.row(0)), lsa_score(base, t.row(0)));
}

TEST(DensityModel, EmptyInputsGiveEmptyScores) {
  const DensityModel m = fit_density_model(gaussian(20, 3, 9), DensityConfig{1e-5, 2});
  EXPECT_TRUE(score_batch(m, TraceMatrix(0, 3)).values.empty());
}

TEST(DensityModel, SaveLoadScoresIdentically) {
  test::TempDir dir;
  const TraceMatrix t = gaussian(60, 7, 10);
  const DensityModel m = fit_density_model(t, DensityConfig{1e-5, 3}, "x");
  save_density_model(m, dir.path() / "model");
  const DensityModel back = load_density_model(dir.path() / "model");
  const TraceMatrix q = gaussian(20, 7, 11);
  EXPECT_EQ(score_batch(m, q).values, score_batch(back, q).values);
  EXPECT_EQ(back.id, "x");
}

}  // namespace
}  // namespace sk
