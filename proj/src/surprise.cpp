#include "sk/surprise.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <Eigen/Dense>

#include "sk/error.hpp"
#include "sk/kernels.hpp"

namespace sk {

namespace fs = std::filesystem;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double KdeModel::scott_factor() const noexcept {
  return std::pow(static_cast<double>(n_), -1.0 / (static_cast<double>(d_) + 4.0));
}

KdeModel kde_fit(const TraceMatrix& points) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (n < 2) throw InsufficientData("KDE needs at least 2 reference points");
  if (!points.all_finite()) throw DegenerateData("KDE reference points contain NaN or Inf");
  const auto ni = static_cast<Eigen::Index>(n);
  const auto di = static_cast<Eigen::Index>(d);

  Eigen::Map<const RowMatrix> x(points.data().data(), ni, di);
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  const double factor2 = std::pow(static_cast<double>(n), -2.0 / (static_cast<double>(d) + 4.0));
  const Eigen::MatrixXd h = factor2 * cov;

  const char* hint = " (reduce pca_k so the reference traces span every retained dimension)";
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) throw SingularCovariance(std::string("bandwidth matrix is not positive definite") + hint);
  const Eigen::MatrixXd l = llt.matrixL();
  const double max_diag = h.diagonal().maxCoeff();
  for (Eigen::Index i = 0; i < di; ++i) {
    if (!(l(i, i) * l(i, i) > 1e-14 * max_diag)) {
      throw SingularCovariance(std::string("bandwidth matrix is numerically singular") + hint);
    }
  }

  KdeModel kde;
  kde.n_ = n;
  kde.d_ = d;
  kde.points_ = points;
  kde.points_.set_dtype(Dtype::f64);
  kde.bandwidth_.resize(d * d);
  kde.chol_.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      kde.bandwidth_[i * d + j] = h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (j <= i) kde.chol_[i * d + j] = l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  // whitened points: L^-1 p_i, stored row-major
  const RowMatrix w = l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd(x.transpose())).transpose();
  kde.whitened_.assign(w.data(), w.data() + w.size());

  double log_det_l = 0.0;
  for (Eigen::Index i = 0; i < di; ++i) log_det_l += std::log(l(i, i));
  kde.log_norm_ = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) - log_det_l -
                  std::log(static_cast<double>(n));
  return kde;
}

namespace {

kernels::KdeView view_of(const KdeModel& kde, const std::vector<double>& whitened) {
  return kernels::KdeView{whitened, kde.cholesky(), kde.n(), kde.d(), kde.log_norm()};
}

}  // namespace

double lsa_score(const KdeModel& kde, std::span<const double> x) {
  if (x.size() != kde.d_) {
    throw ShapeError("LSA query has length " + std::to_string(x.size()) + ", model expects " + std::to_string(kde.d_));
  }
  std::vector<double> scratch(kde.n_);
  return kernels::kde_neg_log_density(view_of(kde, kde.whitened_), x, scratch);
}

std::vector<double> lsa_scores(const KdeModel& kde, const TraceMatrix& queries, Exec exec) {
  if (queries.cols() != kde.d_ && queries.rows() > 0) {
    throw ShapeError("LSA queries have " + std::to_string(queries.cols()) + " columns, model expects " +
                     std::to_string(kde.d_));
  }
  std::vector<double> out(queries.rows());
  const auto view = view_of(kde, kde.whitened_);
  if (exec == Exec::parallel) {
    kernels::omp::kde_scores(view, queries, out);
  } else {
    kernels::serial::kde_scores(view, queries, out);
  }
  return out;
}

DensityModel fit_density_model(const TraceMatrix& train, const DensityConfig& config, std::string id) {
  DensityModel model;
  model.id = std::move(id);
  model.config = config;
  model.mask = variance_filter_fit(train, config.variance_threshold);
  const TraceMatrix kept = apply_mask(train, model.mask);
  const std::size_t k = config.pca_k == 0 ? std::min(train.rows() - 1, kept.cols()) : config.pca_k;
  model.config.pca_k = k;
  model.pca = pca_fit(kept, k);
  model.kde = kde_fit(pca_transform(model.pca, kept, Exec::serial));
  return model;
}

LsaScores score_batch(const DensityModel& model, const TraceMatrix& inputs, std::string dataset_id, Exec exec) {
  if (inputs.cols() != model.input_dim()) {
    throw ShapeError("inputs have " + std::to_string(inputs.cols()) + " columns, model expects " +
                     std::to_string(model.input_dim()));
  }
  LsaScores scores;
  scores.model_id = model.id;
  scores.dataset_id = std::move(dataset_id);
  if (inputs.rows() == 0) return scores;
  const TraceMatrix projected = pca_transform(model.pca, apply_mask(inputs, model.mask), exec);
  scores.values = lsa_scores(model.kde, projected, exec);
  return scores;
}

void save_density_model(const DensityModel& model, const fs::path& dir) {
  fs::create_directories(dir);
  nlohmann::json j;
  j["format"] = "sk-density-model";
  j["version"] = 1;
  j["id"] = model.id;
  j["config"] = {{"variance_threshold", model.config.variance_threshold}, {"pca_k", model.config.pca_k}};
  j["mask"] = model.mask;
  j["explained_variance"] = model.pca.explained_variance;
  j["kde"] = {{"n", model.kde.n()}, {"d", model.kde.d()}, {"scott_factor", model.kde.scott_factor()}};
  {
    std::ofstream out(dir / "model.json");
    if (!out) throw IoError("cannot write " + (dir / "model.json").string());
    out << j.dump(2) << '\n';
  }
  write_trace_matrix(TraceMatrix(1, model.pca.dim, model.pca.mean, Dtype::f64), dir / "pca_mean.atrc");
  write_trace_matrix(TraceMatrix(model.pca.k, model.pca.dim, model.pca.components, Dtype::f64), dir / "pca_components.atrc");
  write_trace_matrix(model.kde.points(), dir / "kde_points.atrc");
}

DensityModel load_density_model(const fs::path& dir) {
  std::ifstream in(dir / "model.json");
  if (!in) throw IoError("cannot open " + (dir / "model.json").string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("json", e.what());
  }
  DensityModel model;
  try {
    model.id = j.at("id").get<std::string>();
    model.config.variance_threshold = j.at("config").at("variance_threshold").get<double>();
    model.config.pca_k = j.at("config").at("pca_k").get<std::size_t>();
    model.mask = j.at("mask").get<ColumnMask>();
    model.pca.explained_variance = j.at("explained_variance").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("json", e.what());
  }
  const TraceMatrix mean = read_trace_matrix(dir / "pca_mean.atrc");
  const TraceMatrix comps = read_trace_matrix(dir / "pca_components.atrc");
  if (mean.rows() != 1 || mean.cols() != model.mask.kept_count || comps.cols() != mean.cols() ||
      comps.rows() != model.pca.explained_variance.size()) {
    throw ShapeError("density model files have inconsistent dimensions");
  }
  model.pca.dim = mean.cols();
  model.pca.k = comps.rows();
  model.pca.mean = mean.data();
  model.pca.components = comps.data();
  TraceMatrix points = read_trace_matrix(dir / "kde_points.atrc");
  if (points.cols() != model.pca.k) throw ShapeError("KDE points do not match PCA dimension");
  model.kde = kde_fit(points);
  return model;
}

void to_json(nlohmann::json& j, const LsaScores& scores) {
  j = nlohmann::json{{"model_id", scores.model_id}, {"dataset_id", scores.dataset_id}, {"values", scores.values}};
}

void from_json(const nlohmann::json& j, LsaScores& scores) {
  scores.model_id = j.value("model_id", std::string{});
  scores.dataset_id = j.value("dataset_id", std::string{});
  scores.values = j.at("values").get<std::vector<double>>();
}

}  // namespace sk
