#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "sk/parallel.hpp"

namespace sk {

inline constexpr std::size_t kDefaultGridSize = 1000;
inline constexpr std::size_t kMinGridSize = 16;

struct DensityCurve {
  std::vector<double> xs;  // uniform, ascending
  std::vector<double> ys;  // trapezoidal integral over xs is 1
};

// 1-D Gaussian KDE, bandwidth n^(-1/5) * sd, on [min - 3h, max + 3h].
DensityCurve kde_curve_1d(std::span<const double> samples, std::size_t grid_size = kDefaultGridSize,
                          Exec exec = Exec::parallel);

double scott_bandwidth_1d(std::span<const double> samples);

struct DivergenceResult {
  double jsd = 0.0;  // base 2, in [0, 1]
  std::size_t grid_size = 0;
  bool standardized = true;
};

DivergenceResult js_divergence(std::span<const double> a, std::span<const double> b, bool standardized = true,
                               std::size_t grid_size = kDefaultGridSize, Exec exec = Exec::parallel);

// Both curves on the shared grid that js_divergence uses.
struct CurvePair {
  std::vector<double> xs;
  std::vector<double> a;
  std::vector<double> b;
};
CurvePair shared_grid_curves(std::span<const double> a, std::span<const double> b, std::size_t grid_size,
                             Exec exec = Exec::parallel);

struct CorrelationResult {
  double rho = 0.0;
  double p_parametric = 1.0;
  std::optional<double> p_permutation;
  std::size_t n = 0;
};

// Average ranks (1-based); ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

CorrelationResult spearman(std::span<const double> a, std::span<const double> b);

// (1 + #{|rho(a, pi(b))| >= |rho(a, b)|}) / (n_perm + 1). Trial t shuffles with
// a stream derived from (seed, t), so the count does not depend on threads.
double permutation_pvalue(std::span<const double> a, std::span<const double> b, std::size_t n_perm,
                          std::uint64_t seed, Exec exec = Exec::parallel);

// spearman() plus the permutation p-value.
CorrelationResult spearman_test(std::span<const double> a, std::span<const double> b, std::size_t n_perm,
                                std::uint64_t seed, Exec exec = Exec::parallel);

enum class Strength { Strong, NotStrong };

// Strong iff rho > 0.7 and the smallest available p-value is below 0.05.
Strength strength_label(const CorrelationResult& r);
const char* to_string(Strength s) noexcept;

void to_json(nlohmann::json& j, const CorrelationResult& r);
void to_json(nlohmann::json& j, const DivergenceResult& r);

}  // namespace sk
