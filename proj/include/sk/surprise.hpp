#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sk/parallel.hpp"
#include "sk/preprocess.hpp"
#include "sk/trace_store.hpp"

namespace sk {

// Gaussian KDE with full-covariance Scott bandwidth H = n^(-2/(d+4)) * cov.
class KdeModel {
 public:
  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  const TraceMatrix& points() const noexcept { return points_; }
  // d x d row-major.
  const std::vector<double>& bandwidth() const noexcept { return bandwidth_; }
  const std::vector<double>& cholesky() const noexcept { return chol_; }
  double log_norm() const noexcept { return log_norm_; }
  double scott_factor() const noexcept;

  friend KdeModel kde_fit(const TraceMatrix& points);
  friend double lsa_score(const KdeModel& kde, std::span<const double> x);
  friend std::vector<double> lsa_scores(const KdeModel& kde, const TraceMatrix& queries, Exec exec);

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  TraceMatrix points_;
  std::vector<double> bandwidth_;
  std::vector<double> chol_;
  std::vector<double> whitened_;
  double log_norm_ = 0.0;
};

KdeModel kde_fit(const TraceMatrix& points);

// Likelihood-based surprise: -log f(x), natural log.
double lsa_score(const KdeModel& kde, std::span<const double> x);
std::vector<double> lsa_scores(const KdeModel& kde, const TraceMatrix& queries, Exec exec = Exec::parallel);

struct DensityConfig {
  double variance_threshold = kDefaultVarianceThreshold;
  // 0 selects min(rows - 1, columns kept by the variance filter).
  std::size_t pca_k = 0;
};

struct DensityModel {
  std::string id;
  DensityConfig config;
  ColumnMask mask;
  PcaModel pca;
  KdeModel kde;

  std::size_t input_dim() const noexcept { return mask.size(); }
};

// variance filter -> PCA -> KDE, all fitted on `train`.
DensityModel fit_density_model(const TraceMatrix& train, const DensityConfig& config, std::string id = {});

struct LsaScores {
  std::vector<double> values;
  std::string model_id;
  std::string dataset_id;

  std::size_t size() const noexcept { return values.size(); }
};

LsaScores score_batch(const DensityModel& model, const TraceMatrix& inputs, std::string dataset_id = {},
                      Exec exec = Exec::parallel);

// Directory layout: model.json (id, config, mask, PCA spectrum) plus
// pca_mean.atrc, pca_components.atrc and kde_points.atrc, all f64.
void save_density_model(const DensityModel& model, const std::filesystem::path& dir);
DensityModel load_density_model(const std::filesystem::path& dir);

void to_json(nlohmann::json& j, const LsaScores& scores);
void from_json(const nlohmann::json& j, LsaScores& scores);

}  // namespace sk
