#include <vector>

#include "kernels_detail.hpp"
#include "sk/kernels.hpp"
#include "sk/parallel.hpp"

#ifdef SK_HAVE_OPENMP
#include <omp.h>
#endif

namespace sk {

void set_num_threads(int threads) {
#ifdef SK_HAVE_OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int max_threads() {
#ifdef SK_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace sk

namespace sk::kernels::omp {

using Index = std::ptrdiff_t;

void project_rows(const TraceMatrix& m, std::span<const double> mean, std::span<const double> components,
                  std::size_t k, TraceMatrix& out) {
  const auto rows = static_cast<Index>(m.rows());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < rows; ++i) {
    const auto r = static_cast<std::size_t>(i);
    detail::project_row(m.row(r), mean, components, k, out.row(r));
  }
}

void kde_scores(const KdeView& kde, const TraceMatrix& queries, std::span<double> out) {
  const auto rows = static_cast<Index>(queries.rows());
#pragma omp parallel
  {
    std::vector<double> scratch(kde.n);
#pragma omp for schedule(static)
    for (Index i = 0; i < rows; ++i) {
      const auto r = static_cast<std::size_t>(i);
      out[r] = kde_neg_log_density(kde, queries.row(r), scratch);
    }
  }
}

void gaussian_grid(std::span<const double> samples, double bandwidth, std::span<const double> xs,
                   std::span<double> ys) {
  const auto g = static_cast<Index>(xs.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < g; ++i) {
    const auto r = static_cast<std::size_t>(i);
    ys[r] = detail::gaussian_sum(samples, bandwidth, xs[r]);
  }
}

std::size_t permutation_exceed_count(const PermutationTask& task) {
  const auto trials = static_cast<Index>(task.n_perm);
  std::size_t count = 0;
#pragma omp parallel reduction(+ : count)
  {
    std::vector<double> buffer;
#pragma omp for schedule(static)
    for (Index t = 0; t < trials; ++t) count += detail::permutation_trial(task, static_cast<std::size_t>(t), buffer) ? 1 : 0;
  }
  return count;
}

void predict_passes(const NeuralModel& model, const TraceMatrix& inputs, std::size_t passes,
                    std::optional<std::uint64_t> seed, std::span<int> predictions, TraceMatrix& penultimate) {
  const std::size_t n = inputs.rows();
  const auto total = static_cast<Index>(passes * n);
#pragma omp parallel for schedule(static)
  for (Index t = 0; t < total; ++t) {
    const auto flat = static_cast<std::size_t>(t);
    detail::predict_one(model, inputs, flat / n, flat % n, seed, predictions, penultimate);
  }
}

}  // namespace sk::kernels::omp
