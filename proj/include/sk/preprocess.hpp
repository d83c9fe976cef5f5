#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "sk/parallel.hpp"
#include "sk/trace_store.hpp"

namespace sk {

inline constexpr double kDefaultVarianceThreshold = 1e-5;

struct ColumnMask {
  std::vector<bool> keep;
  std::size_t kept_count = 0;

  std::size_t size() const noexcept { return keep.size(); }
  static ColumnMask identity(std::size_t cols);
  friend bool operator==(const ColumnMask&, const ColumnMask&) = default;
};

// Keeps column j iff its sample variance (ddof = 1) is strictly greater than
// threshold.
ColumnMask variance_filter_fit(const TraceMatrix& train, double threshold = kDefaultVarianceThreshold);
TraceMatrix apply_mask(const TraceMatrix& m, const ColumnMask& mask);

// Principal directions of the centered training data, computed from its SVD.
// components is k x dim row-major; each row's largest-magnitude entry is
// non-negative.
struct PcaModel {
  std::size_t dim = 0;
  std::size_t k = 0;
  std::vector<double> mean;
  std::vector<double> components;
  std::vector<double> explained_variance;

  std::span<const double> component(std::size_t i) const noexcept { return {components.data() + i * dim, dim}; }
  friend bool operator==(const PcaModel&, const PcaModel&) = default;
};

PcaModel pca_fit(const TraceMatrix& train, std::size_t k);
TraceMatrix pca_transform(const PcaModel& model, const TraceMatrix& m, Exec exec = Exec::parallel);

std::vector<double> zscore(std::span<const double> values);

double sample_mean(std::span<const double> values);
// ddof = 1
double sample_variance(std::span<const double> values);

void to_json(nlohmann::json& j, const ColumnMask& mask);
void from_json(const nlohmann::json& j, ColumnMask& mask);
void to_json(nlohmann::json& j, const PcaModel& model);
void from_json(const nlohmann::json& j, PcaModel& model);

}  // namespace sk
