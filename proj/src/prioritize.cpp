#include "sk/prioritize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sk/error.hpp"

namespace sk {

Ranking rank_by_lsa(const LsaScores& scores, Direction direction) {
  for (double v : scores.values) {
    if (!std::isfinite(v)) throw DegenerateData("cannot rank non-finite LSA scores");
  }
  Ranking r;
  r.scores = scores;
  r.direction = direction;
  r.order.resize(scores.size());
  std::iota(r.order.begin(), r.order.end(), 0);
  const auto& v = scores.values;
  if (direction == Direction::Descending) {
    std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t i, std::size_t j) { return v[i] > v[j]; });
  } else {
    std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  }
  return r;
}

AccuracyCurve cumulative_accuracy_curve(const Ranking& ranking, const std::vector<bool>& correct) {
  if (correct.size() != ranking.order.size()) {
    throw ShapeError("correctness vector has " + std::to_string(correct.size()) + " entries, ranking has " +
                     std::to_string(ranking.order.size()));
  }
  AccuracyCurve curve;
  curve.ks.reserve(correct.size());
  curve.acc.reserve(correct.size());
  std::size_t hits = 0;
  for (std::size_t k = 1; k <= ranking.order.size(); ++k) {
    hits += correct[ranking.order[k - 1]] ? 1 : 0;
    curve.ks.push_back(k);
    curve.acc.push_back(static_cast<double>(hits) / static_cast<double>(k));
  }
  return curve;
}

Selection select_top_k_correct(const Ranking& ranking, const std::vector<bool>& original_correct, std::size_t k) {
  if (k < 1) throw InvalidArgument("subset size must be >= 1");
  if (original_correct.size() != ranking.order.size()) throw ShapeError("correctness vector length != ranking length");
  Selection s;
  for (std::size_t idx : ranking.order) {
    if (s.indices.size() == k) break;
    if (original_correct[idx]) s.indices.push_back(idx);
  }
  s.shortfall = s.indices.size() < k;
  return s;
}

}  // namespace sk
