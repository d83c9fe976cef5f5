#include "sk/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "sk/error.hpp"
#include "sk/kernels.hpp"

namespace sk {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

ColumnMask ColumnMask::identity(std::size_t cols) {
  return ColumnMask{std::vector<bool>(cols, true), cols};
}

double sample_mean(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  const double mean = sample_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

ColumnMask variance_filter_fit(const TraceMatrix& train, double threshold) {
  if (train.rows() < 2) throw InsufficientData("variance filter needs at least 2 rows");
  if (!(threshold >= 0.0)) throw InvalidArgument("variance threshold must be >= 0");
  const std::size_t n = train.rows();
  const std::size_t d = train.cols();
  std::vector<double> mean(d, 0.0), ss(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = train.row(i);
    for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = train.row(i);
    for (std::size_t j = 0; j < d; ++j) ss[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
  }
  ColumnMask mask;
  mask.keep.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    mask.keep[j] = ss[j] / static_cast<double>(n - 1) > threshold;
    mask.kept_count += mask.keep[j] ? 1 : 0;
  }
  if (mask.kept_count == 0) throw DegenerateData("every column has variance <= " + std::to_string(threshold));
  return mask;
}

TraceMatrix apply_mask(const TraceMatrix& m, const ColumnMask& mask) {
  if (mask.size() != m.cols()) {
    throw ShapeError("mask length " + std::to_string(mask.size()) + " != matrix cols " + std::to_string(m.cols()));
  }
  TraceMatrix out(m.rows(), mask.kept_count, m.dtype());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto src = m.row(i);
    auto dst = out.row(i);
    std::size_t c = 0;
    for (std::size_t j = 0; j < src.size(); ++j) {
      if (mask.keep[j]) dst[c++] = src[j];
    }
  }
  return out;
}

PcaModel pca_fit(const TraceMatrix& train, std::size_t k) {
  const std::size_t n = train.rows();
  const std::size_t d = train.cols();
  if (n < 2 || k < 1 || k > std::min(n - 1, d)) {
    throw ShapeError("pca k=" + std::to_string(k) + " outside [1, min(rows-1, cols)] for " + std::to_string(n) +
                     "x" + std::to_string(d) + " data");
  }
  Eigen::Map<const RowMatrix> x(train.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const Eigen::MatrixXd& v = svd.matrixV();

  PcaModel model;
  model.dim = d;
  model.k = k;
  model.mean.assign(mean.data(), mean.data() + d);
  model.components.resize(k * d);
  model.explained_variance.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    Eigen::Index arg = 0;
    v.col(col).cwiseAbs().maxCoeff(&arg);
    const double sign = v(arg, col) < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < d; ++j) model.components[c * d + j] = sign * v(static_cast<Eigen::Index>(j), col);
    model.explained_variance[c] = sv(col) * sv(col) / static_cast<double>(n - 1);
  }
  return model;
}

TraceMatrix pca_transform(const PcaModel& model, const TraceMatrix& m, Exec exec) {
  if (m.cols() != model.dim) {
    throw ShapeError("pca expects " + std::to_string(model.dim) + " columns, got " + std::to_string(m.cols()));
  }
  TraceMatrix out(m.rows(), model.k);
  if (exec == Exec::parallel) {
    kernels::omp::project_rows(m, model.mean, model.components, model.k, out);
  } else {
    kernels::serial::project_rows(m, model.mean, model.components, model.k, out);
  }
  return out;
}

std::vector<double> zscore(std::span<const double> values) {
  if (values.size() < 2) throw InsufficientData("z-score needs at least 2 values");
  const double mean = sample_mean(values);
  const double sd = std::sqrt(sample_variance(values));
  if (!(sd > 0.0)) throw DegenerateData("z-score of a constant vector");
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [&](double v) { return (v - mean) / sd; });
  return out;
}

void to_json(nlohmann::json& j, const ColumnMask& mask) {
  j = nlohmann::json{{"keep", mask.keep}, {"kept_count", mask.kept_count}};
}

void from_json(const nlohmann::json& j, ColumnMask& mask) {
  mask.keep = j.at("keep").get<std::vector<bool>>();
  mask.kept_count = static_cast<std::size_t>(std::count(mask.keep.begin(), mask.keep.end(), true));
  if (j.contains("kept_count") && j["kept_count"].get<std::size_t>() != mask.kept_count) {
    throw ShapeError("mask kept_count does not match keep array");
  }
}

void to_json(nlohmann::json& j, const PcaModel& model) {
  nlohmann::json comps = nlohmann::json::array();
  for (std::size_t c = 0; c < model.k; ++c) {
    auto row = model.component(c);
    comps.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j = nlohmann::json{{"mean", model.mean}, {"components", comps}, {"explained_variance", model.explained_variance}};
}

void from_json(const nlohmann::json& j, PcaModel& model) {
  model.mean = j.at("mean").get<std::vector<double>>();
  model.dim = model.mean.size();
  const auto comps = j.at("components").get<std::vector<std::vector<double>>>();
  model.k = comps.size();
  model.components.clear();
  for (const auto& row : comps) {
    if (row.size() != model.dim) throw ShapeError("pca component length does not match mean length");
    model.components.insert(model.components.end(), row.begin(), row.end());
  }
  model.explained_variance = j.at("explained_variance").get<std::vector<double>>();
  if (model.explained_variance.size() != model.k) throw ShapeError("explained_variance length != component count");
}

}  // namespace sk
