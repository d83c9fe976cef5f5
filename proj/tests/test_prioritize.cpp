#include <gtest/gtest.h>

#include "scenario.hpp"
#include "sk/error.hpp"
#include "sk/prioritize.hpp"
#include "sk/surprise.hpp"

namespace sk {
namespace {

LsaScores scores_of(std::vector<double> v) { return LsaScores{std::move(v), "m", "d"}; }

TEST(Rank, Descending) {
  EXPECT_EQ(rank_by_lsa(scores_of({3.0, 1.0, 2.0})).order, (std::vector<std::size_t>{0, 2, 1}));
}

TEST(Rank, Ascending) {
  EXPECT_EQ(rank_by_lsa(scores_of({3.0, 1.0, 2.0}), Direction::Ascending).order,
            (std::vector<std::size_t>{1, 2, 0}));
}

TEST(Rank, TiesAreStable) {
  EXPECT_EQ(rank_by_lsa(scores_of({2.0, 2.0, 1.0})).order, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Rank, Empty) { EXPECT_TRUE(rank_by_lsa(scores_of({})).order.empty()); }

TEST(AccuracyCurve, Arithmetic) {
  const Ranking r = rank_by_lsa(scores_of({4, 3, 2, 1}));
  const AccuracyCurve c = cumulative_accuracy_curve(r, {false, false, true, true});
  EXPECT_EQ(c.ks, (std::vector<std::size_t>{1, 2, 3, 4}));
  EXPECT_EQ(c.acc, (std::vector<double>{0.0, 0.0, 1.0 / 3.0, 0.5}));
}

TEST(AccuracyCurve, AllCorrect) {
  const Ranking r = rank_by_lsa(scores_of({1, 5, 3}));
  const AccuracyCurve c = cumulative_accuracy_curve(r, {true, true, true});
  for (double a : c.acc) EXPECT_EQ(a, 1.0);
}

TEST(AccuracyCurve, LengthMismatch) {
  EXPECT_THROW(cumulative_accuracy_curve(rank_by_lsa(scores_of({1, 2})), {true}), ShapeError);
}

TEST(AccuracyCurve, DescendingLsaBelowRandomOnShiftedScenario) {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto d = scenario::make(seed, 200, 200);
    const auto correct = scenario::stub_correctness(d, seed);
    const DensityModel m = fit_density_model(d.reference_a, DensityConfig{});
    const AccuracyCurve c = cumulative_accuracy_curve(rank_by_lsa(score_batch(m, d.test)), correct);
    const double overall = c.acc.back();
    // the random ranking's expected curve is flat at the overall accuracy
    bool below = true;
    for (std::size_t k = c.ks.size() / 4; k < c.ks.size(); ++k) below = below && c.acc[k - 1] <= overall + 1e-12;
    good += below;
  }
  EXPECT_GE(good, 95);
}

TEST(Select, TopKCorrect) {
  const Ranking r = rank_by_lsa(scores_of({4, 3, 2, 1}));
  const Selection s = select_top_k_correct(r, {true, false, true, true}, 2);
  EXPECT_EQ(s.indices, (std::vector<std::size_t>{0, 2}));
  EXPECT_FALSE(s.shortfall);
}

TEST(Select, Shortfall) {
  const Ranking r = rank_by_lsa(scores_of({4, 3, 2, 1}));
  const Selection s = select_top_k_correct(r, {true, false, false, true}, 3);
  EXPECT_EQ(s.indices, (std::vector<std::size_t>{0, 3}));
  EXPECT_TRUE(s.shortfall);
}

TEST(Select, Presets) {
  EXPECT_EQ(kImageNetSubsetSizes, (std::array<std::size_t, 3>{30, 50, 70}));
  EXPECT_EQ(kCifar10SubsetSizes, (std::array<std::size_t, 3>{100, 300, 500}));
}

}  // namespace
}  // namespace sk
