#include "sk/mutation.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "sk/error.hpp"
#include "sk/preprocess.hpp"
#include "sk/rng.hpp"
#include "sk/special.hpp"

namespace sk {

namespace {

// Stream tags keep the selection and noise draws independent.
constexpr std::uint64_t kSelectStream = 0;
constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kBiasColumn = ~std::uint64_t{0};

}  // namespace

void MutationSpec::validate() const {
  if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidArgument("mutation rho must be in [0, 1]");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("mutation sigma must be > 0");
}

NeuralModel gaussian_fuzz(const NeuralModel& model, const MutationSpec& spec) {
  spec.validate();
  NeuralModel mutant = model;
  auto& layers = mutant.mutable_layers();
  const auto perturb = [&](double& w, std::uint64_t layer, std::uint64_t r, std::uint64_t c) {
    const double u = rng::to_unit(rng::derive(spec.seed, {kSelectStream, layer, r, c}));
    if (u < spec.rho) w *= 1.0 + spec.sigma * rng::normal_at(rng::derive(spec.seed, {kNoiseStream, layer, r, c}));
  };
  for (std::size_t li = 0; li < layers.size(); ++li) {
    auto* dense = std::get_if<Dense>(&layers[li]);
    if (dense == nullptr) continue;
    for (std::size_t r = 0; r < dense->out; ++r) {
      for (std::size_t c = 0; c < dense->in; ++c) perturb(dense->w(r, c), li, r, c);
      if (spec.include_biases) perturb(dense->bias[r], li, r, kBiasColumn);
    }
  }
  return mutant;
}

const char* to_string(KillCriterion c) noexcept {
  return c == KillCriterion::SingleInstance ? "single" : "statistical";
}

KillCriterion parse_criterion(const std::string& name) {
  if (name == "single" || name == "single_instance") return KillCriterion::SingleInstance;
  if (name == "statistical") return KillCriterion::Statistical;
  throw InvalidArgument("unknown kill criterion '" + name + "'");
}

KillVerdict single_instance_kill(std::span<const int> orig_pred, std::span<const int> mut_pred,
                                 const LabelVector& truth) {
  if (orig_pred.size() != truth.size() || mut_pred.size() != truth.size()) {
    throw ShapeError("prediction and label vectors differ in length");
  }
  KillVerdict v;
  v.criterion = KillCriterion::SingleInstance;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (orig_pred[i] == truth.values[i] && mut_pred[i] != truth.values[i]) v.killing_indices.push_back(i);
  }
  v.killed = !v.killing_indices.empty();
  return v;
}

KillVerdict statistical_kill(std::span<const double> orig_acc, std::span<const double> mut_acc, double alpha,
                             double d_min) {
  if (orig_acc.size() < 2 || mut_acc.size() < 2) throw InsufficientData("statistical kill needs >= 2 instances per model");
  KillVerdict v;
  v.criterion = KillCriterion::Statistical;
  v.original_accuracy.assign(orig_acc.begin(), orig_acc.end());
  v.mutant_accuracy.assign(mut_acc.begin(), mut_acc.end());

  const double n1 = static_cast<double>(orig_acc.size());
  const double n2 = static_cast<double>(mut_acc.size());
  const double m1 = sample_mean(orig_acc);
  const double m2 = sample_mean(mut_acc);
  const double v1 = sample_variance(orig_acc);
  const double v2 = sample_variance(mut_acc);

  if (v1 == 0.0 && v2 == 0.0) {
    const bool differ = m1 != m2;
    v.p_value = differ ? 0.0 : 1.0;
    v.effect_size = differ ? std::copysign(std::numeric_limits<double>::max(), m1 - m2) : 0.0;
    v.killed = differ;
    return v;
  }
  const double se1 = v1 / n1;
  const double se2 = v2 / n2;
  const double t = (m1 - m2) / std::sqrt(se1 + se2);
  const double df = (se1 + se2) * (se1 + se2) / (se1 * se1 / (n1 - 1.0) + se2 * se2 / (n2 - 1.0));
  const double pooled = std::sqrt(((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0));
  v.p_value = special::student_t_two_sided(t, df);
  v.effect_size = (m1 - m2) / pooled;
  v.killed = *v.p_value < alpha && std::fabs(*v.effect_size) >= d_min;
  return v;
}

namespace {

std::vector<double> per_pass_accuracy(const BatchPrediction& pred, const LabelVector& truth) {
  std::vector<double> acc(pred.passes, 0.0);
  if (pred.n == 0) return acc;
  for (std::size_t p = 0; p < pred.passes; ++p) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.n; ++i) hits += pred.at(p, i) == truth.values[i] ? 1 : 0;
    acc[p] = static_cast<double>(hits) / static_cast<double>(pred.n);
  }
  return acc;
}

}  // namespace

KillVerdict evaluate_kill(const NeuralModel& original, const NeuralModel& mutant, const TraceMatrix& inputs,
                          const LabelVector& truth, const KillConfig& config) {
  if (inputs.rows() != truth.size()) throw ShapeError("inputs and labels differ in length");
  if (config.criterion == KillCriterion::SingleInstance) {
    const auto a = predict_batch(original, inputs, 1, std::nullopt);
    const auto b = predict_batch(mutant, inputs, 1, std::nullopt);
    return single_instance_kill(a.pass(0), b.pass(0), truth);
  }
  const auto a = predict_batch(original, inputs, config.passes, config.dropout_seed);
  const auto b = predict_batch(mutant, inputs, config.passes, config.dropout_seed);
  return statistical_kill(per_pass_accuracy(a, truth), per_pass_accuracy(b, truth), config.alpha, config.d_min);
}

RhoSearchResult binary_search_rho(const std::function<bool(double)>& killed_at, std::size_t iters) {
  if (iters < 1) throw InvalidArgument("binary search needs iters >= 1");
  RhoSearchResult result;
  const bool top = killed_at(1.0);
  result.trace.emplace_back(1.0, top);
  if (!top) throw NotKillable("mutant is not killed even at rho = 1");
  double lo = 0.0;
  double hi = 1.0;
  for (std::size_t i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const bool killed = killed_at(mid);
    result.trace.emplace_back(mid, killed);
    (killed ? hi : lo) = mid;
  }
  result.rho_star = hi;
  // Bisection alone never probes above a killed rho, so check one larger ratio.
  const double probe = 2.0 * hi;
  if (probe < 1.0) {
    const bool killed = killed_at(probe);
    result.trace.emplace_back(probe, killed);
    result.non_monotone = !killed;
  }
  return result;
}

std::uint64_t candidate_seed(std::uint64_t seed, double rho) noexcept {
  return rng::derive(seed, {std::bit_cast<std::uint64_t>(rho)});
}

RhoSearchResult binary_search_rho(const NeuralModel& model, const TraceMatrix& inputs, const LabelVector& truth,
                                  double sigma, std::size_t iters, const KillConfig& kill, std::uint64_t seed) {
  const auto killed_at = [&](double rho) {
    const NeuralModel mutant = gaussian_fuzz(model, MutationSpec{rho, sigma, candidate_seed(seed, rho)});
    return evaluate_kill(model, mutant, inputs, truth, kill).killed;
  };
  return binary_search_rho(killed_at, iters);
}

void to_json(nlohmann::json& j, const KillVerdict& v) {
  j = nlohmann::json{{"killed", v.killed}, {"criterion", to_string(v.criterion)}};
  j["p_value"] = v.p_value ? nlohmann::json(*v.p_value) : nlohmann::json(nullptr);
  j["effect_size"] = v.effect_size ? nlohmann::json(*v.effect_size) : nlohmann::json(nullptr);
  if (v.criterion == KillCriterion::SingleInstance) {
    j["killing_indices"] = v.killing_indices;
  } else {
    j["original_accuracy"] = v.original_accuracy;
    j["mutant_accuracy"] = v.mutant_accuracy;
  }
}

}  // namespace sk
