#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "sk/surprise.hpp"

namespace sk {

enum class Direction { Descending, Ascending };

struct Ranking {
  std::vector<std::size_t> order;
  LsaScores scores;
  Direction direction = Direction::Descending;
};

// Stable: equal scores keep ascending original index.
Ranking rank_by_lsa(const LsaScores& scores, Direction direction = Direction::Descending);

struct AccuracyCurve {
  std::vector<std::size_t> ks;  // 1..N
  std::vector<double> acc;      // accuracy of the first k ranked inputs
};

AccuracyCurve cumulative_accuracy_curve(const Ranking& ranking, const std::vector<bool>& correct);

struct Selection {
  std::vector<std::size_t> indices;
  bool shortfall = false;  // fewer than k correct inputs existed
};

// First k ranked inputs that the original model classifies correctly.
Selection select_top_k_correct(const Ranking& ranking, const std::vector<bool>& original_correct, std::size_t k);

inline constexpr std::array<std::size_t, 3> kImageNetSubsetSizes{30, 50, 70};
inline constexpr std::array<std::size_t, 3> kCifar10SubsetSizes{100, 300, 500};

}  // namespace sk
