#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "kernels_detail.hpp"
#include "sk/kernels.hpp"
#include "sk/nnrt.hpp"
#include "sk/rng.hpp"

namespace sk::kernels {

std::uint64_t pass_seed(std::uint64_t seed, std::size_t pass) noexcept { return rng::derive(seed, {pass}); }

double kde_neg_log_density(const KdeView& kde, std::span<const double> x, std::span<double> scratch) {
  const std::size_t d = kde.d;
  // z = L^-1 x by forward substitution
  double z_buf[64];
  std::vector<double> z_heap;
  double* z = z_buf;
  if (d > 64) {
    z_heap.resize(d);
    z = z_heap.data();
  }
  for (std::size_t i = 0; i < d; ++i) {
    double acc = x[i];
    const double* li = kde.chol.data() + i * d;
    for (std::size_t j = 0; j < i; ++j) acc -= li[j] * z[j];
    z[i] = acc / li[i];
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < kde.n; ++p) {
    const double* w = kde.whitened.data() + p * d;
    double q = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = z[j] - w[j];
      q += diff * diff;
    }
    scratch[p] = q;
    if (q < best) best = q;
  }
  double sum = 0.0;
  for (std::size_t p = 0; p < kde.n; ++p) sum += std::exp(-0.5 * (scratch[p] - best));
  return -(kde.log_norm - 0.5 * best + std::log(sum));
}

double centered_correlation(std::span<const double> a, std::span<const double> b, double norm_product) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return dot / norm_product;
}

namespace detail {

void project_row(std::span<const double> src, std::span<const double> mean, std::span<const double> components,
                 std::size_t k, std::span<double> dst) {
  const std::size_t dim = mean.size();
  for (std::size_t c = 0; c < k; ++c) {
    const double* comp = components.data() + c * dim;
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) acc += comp[j] * (src[j] - mean[j]);
    dst[c] = acc;
  }
}

double gaussian_sum(std::span<const double> samples, double bandwidth, double x) {
  const double norm = 1.0 / (static_cast<double>(samples.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  double acc = 0.0;
  for (double s : samples) {
    const double u = (x - s) / bandwidth;
    acc += std::exp(-0.5 * u * u);
  }
  return acc * norm;
}

bool permutation_trial(const PermutationTask& task, std::size_t trial, std::vector<double>& buffer) {
  buffer.assign(task.centered_b.begin(), task.centered_b.end());
  rng::SplitMix64 gen(rng::derive(task.seed, {trial}));
  rng::shuffle(std::span<double>(buffer), gen);
  const double r = centered_correlation(task.centered_a, buffer, task.norm_product);
  // equal |rho| computed along a different summation path may differ in the last bits
  return std::fabs(r) >= task.observed - 1e-12;
}

void predict_one(const NeuralModel& model, const TraceMatrix& inputs, std::size_t pass, std::size_t i,
                 std::optional<std::uint64_t> seed, std::span<int> predictions, TraceMatrix& penultimate) {
  std::optional<std::uint64_t> s;
  if (seed) s = pass_seed(*seed, pass);
  const ForwardResult r = forward(model, inputs.row(i), s);
  predictions[pass * inputs.rows() + i] = r.predicted;
  if (pass == 0) std::copy(r.penultimate.begin(), r.penultimate.end(), penultimate.row(i).begin());
}

}  // namespace detail

namespace serial {

void project_rows(const TraceMatrix& m, std::span<const double> mean, std::span<const double> components,
                  std::size_t k, TraceMatrix& out) {
  for (std::size_t i = 0; i < m.rows(); ++i) detail::project_row(m.row(i), mean, components, k, out.row(i));
}

void kde_scores(const KdeView& kde, const TraceMatrix& queries, std::span<double> out) {
  std::vector<double> scratch(kde.n);
  for (std::size_t i = 0; i < queries.rows(); ++i) out[i] = kde_neg_log_density(kde, queries.row(i), scratch);
}

void gaussian_grid(std::span<const double> samples, double bandwidth, std::span<const double> xs,
                   std::span<double> ys) {
  for (std::size_t g = 0; g < xs.size(); ++g) ys[g] = detail::gaussian_sum(samples, bandwidth, xs[g]);
}

std::size_t permutation_exceed_count(const PermutationTask& task) {
  std::vector<double> buffer;
  std::size_t count = 0;
  for (std::size_t t = 0; t < task.n_perm; ++t) count += detail::permutation_trial(task, t, buffer) ? 1 : 0;
  return count;
}

void predict_passes(const NeuralModel& model, const TraceMatrix& inputs, std::size_t passes,
                    std::optional<std::uint64_t> seed, std::span<int> predictions, TraceMatrix& penultimate) {
  for (std::size_t p = 0; p < passes; ++p) {
    for (std::size_t i = 0; i < inputs.rows(); ++i) detail::predict_one(model, inputs, p, i, seed, predictions, penultimate);
  }
}

}  // namespace serial
}  // namespace sk::kernels
