#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "sk/nnrt.hpp"
#include "sk/trace_store.hpp"

namespace sk {

// Gaussian Fuzzing: each Dense weight is selected with probability rho and
// multiplied by (1 + eps), eps ~ N(0, sigma^2).
struct MutationSpec {
  double rho = 0.0;
  double sigma = 0.5;
  std::uint64_t seed = 0;
  bool include_biases = false;

  void validate() const;
};

NeuralModel gaussian_fuzz(const NeuralModel& model, const MutationSpec& spec);

enum class KillCriterion { SingleInstance, Statistical };
const char* to_string(KillCriterion c) noexcept;
KillCriterion parse_criterion(const std::string& name);

struct KillVerdict {
  bool killed = false;
  KillCriterion criterion = KillCriterion::SingleInstance;
  std::optional<double> p_value;
  std::optional<double> effect_size;
  std::vector<std::size_t> killing_indices;  // single-instance
  std::vector<double> original_accuracy;     // statistical, one per instance
  std::vector<double> mutant_accuracy;
};

// Killed iff some input is classified correctly by the original and
// incorrectly by the mutant.
KillVerdict single_instance_kill(std::span<const int> orig_pred, std::span<const int> mut_pred,
                                 const LabelVector& truth);

inline constexpr double kDefaultAlpha = 0.05;
inline constexpr double kDefaultMinEffect = 0.5;

// Welch two-sided t-test plus Cohen's d = (mean_orig - mean_mut) / pooled sd.
// Killed iff p < alpha and |d| >= d_min. Two constant samples are killed iff
// their means differ (p = 0, d = +-max double), otherwise p = 1, d = 0.
KillVerdict statistical_kill(std::span<const double> orig_acc, std::span<const double> mut_acc,
                             double alpha = kDefaultAlpha, double d_min = kDefaultMinEffect);

struct KillConfig {
  KillCriterion criterion = KillCriterion::Statistical;
  std::size_t passes = 20;  // stochastic instances per model
  double alpha = kDefaultAlpha;
  double d_min = kDefaultMinEffect;
  std::uint64_t dropout_seed = 0;
};

// Runs both models on `inputs`. Statistical mode uses `passes` dropout
// instances; pass p of the original and of the mutant share one dropout mask.
KillVerdict evaluate_kill(const NeuralModel& original, const NeuralModel& mutant, const TraceMatrix& inputs,
                          const LabelVector& truth, const KillConfig& config);

struct RhoSearchResult {
  double rho_star = 1.0;
  std::vector<std::pair<double, bool>> trace;  // (rho, killed) in evaluation order
  bool non_monotone = false;
};

// Bisection for the smallest killable rho, assuming killability is
// non-decreasing in rho. Throws NotKillable when rho = 1 is not killed.
RhoSearchResult binary_search_rho(const std::function<bool(double)>& killed_at, std::size_t iters);

RhoSearchResult binary_search_rho(const NeuralModel& model, const TraceMatrix& inputs, const LabelVector& truth,
                                  double sigma, std::size_t iters, const KillConfig& kill, std::uint64_t seed);

// Mutation seed used for candidate rho.
std::uint64_t candidate_seed(std::uint64_t seed, double rho) noexcept;

void to_json(nlohmann::json& j, const KillVerdict& v);

}  // namespace sk
