#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sk/trace_store.hpp"

namespace sk {
class NeuralModel;
}

// Data-parallel inner loops. Each kernel exists twice with the same signature:
// serial:: is the reference, omp:: splits the outer loop across threads. The
// two must agree bit-for-bit; tests compare them directly.
namespace sk::kernels {

// Whitened Gaussian-KDE reference set: row i of `whitened` is L^-1 p_i where
// H = L L^T is the bandwidth matrix.
struct KdeView {
  std::span<const double> whitened;  // n x d
  std::span<const double> chol;      // d x d lower triangle, row-major
  std::size_t n = 0;
  std::size_t d = 0;
  double log_norm = 0.0;             // -d/2 log(2 pi) - log det L - log n
};

// -log f(x) for a single query; `scratch` must hold n values. Squared
// Mahalanobis distances are folded with log-sum-exp so queries far from every
// reference point stay finite.
double kde_neg_log_density(const KdeView& kde, std::span<const double> x, std::span<double> scratch);

struct PermutationTask {
  std::span<const double> centered_a;  // a's ranks minus their mean
  std::span<const double> centered_b;
  double norm_product = 0.0;           // |centered_a| * |centered_b|
  double observed = 0.0;               // |rho| of the unpermuted pair
  std::size_t n_perm = 0;
  std::uint64_t seed = 0;
};

// Pearson correlation of two already-centered vectors.
double centered_correlation(std::span<const double> a, std::span<const double> b, double norm_product);

namespace serial {
void project_rows(const TraceMatrix& m, std::span<const double> mean, std::span<const double> components,
                  std::size_t k, TraceMatrix& out);
void kde_scores(const KdeView& kde, const TraceMatrix& queries, std::span<double> out);
void gaussian_grid(std::span<const double> samples, double bandwidth, std::span<const double> xs,
                   std::span<double> ys);
std::size_t permutation_exceed_count(const PermutationTask& task);
// predictions is passes x N row-major; penultimate (N x width) is filled from pass 0.
void predict_passes(const NeuralModel& model, const TraceMatrix& inputs, std::size_t passes,
                    std::optional<std::uint64_t> seed, std::span<int> predictions, TraceMatrix& penultimate);
}  // namespace serial

namespace omp {
void project_rows(const TraceMatrix& m, std::span<const double> mean, std::span<const double> components,
                  std::size_t k, TraceMatrix& out);
void kde_scores(const KdeView& kde, const TraceMatrix& queries, std::span<double> out);
void gaussian_grid(std::span<const double> samples, double bandwidth, std::span<const double> xs,
                   std::span<double> ys);
std::size_t permutation_exceed_count(const PermutationTask& task);
void predict_passes(const NeuralModel& model, const TraceMatrix& inputs, std::size_t passes,
                    std::optional<std::uint64_t> seed, std::span<int> predictions, TraceMatrix& penultimate);
}  // namespace omp

// Per-pass dropout seed shared by both implementations.
std::uint64_t pass_seed(std::uint64_t seed, std::size_t pass) noexcept;

}  // namespace sk::kernels
