#include <benchmark/benchmark.h>

#include "sk/diststat.hpp"
#include "sk/nnrt.hpp"
#include "sk/rng.hpp"
#include "sk/surprise.hpp"

namespace {

using namespace sk;

TraceMatrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  rng::SplitMix64 gen(seed);
  TraceMatrix m(rows, cols);
  for (double& v : m.data()) v = gen.normal();
  return m;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void BM_KdeScores(benchmark::State& state) {
  const KdeModel kde = kde_fit(gaussian(2000, 8, 1));
  const TraceMatrix q = gaussian(1000, 8, 2);
  for (auto _ : state) benchmark::DoNotOptimize(lsa_scores(kde, q, exec_of(state)));
}
BENCHMARK(BM_KdeScores)->Arg(0)->Arg(1)->ArgNames({"omp"});

void BM_PcaTransform(benchmark::State& state) {
  const TraceMatrix m = gaussian(5000, 256, 3);
  const PcaModel p = pca_fit(m, 32);
  for (auto _ : state) benchmark::DoNotOptimize(pca_transform(p, m, exec_of(state)));
}
BENCHMARK(BM_PcaTransform)->Arg(0)->Arg(1)->ArgNames({"omp"});

void BM_KdeCurve(benchmark::State& state) {
  const auto s = gaussian(5000, 1, 4).data();
  for (auto _ : state) benchmark::DoNotOptimize(kde_curve_1d(s, kDefaultGridSize, exec_of(state)));
}
BENCHMARK(BM_KdeCurve)->Arg(0)->Arg(1)->ArgNames({"omp"});

void BM_Permutation(benchmark::State& state) {
  const auto a = gaussian(1000, 1, 5).data();
  const auto b = gaussian(1000, 1, 6).data();
  for (auto _ : state) benchmark::DoNotOptimize(permutation_pvalue(a, b, 2000, 7, exec_of(state)));
}
BENCHMARK(BM_Permutation)->Arg(0)->Arg(1)->ArgNames({"omp"});

void BM_PredictPasses(benchmark::State& state) {
  const std::size_t h = 256;
  rng::SplitMix64 gen(8);
  Dense a{h, 64, std::vector<double>(h * 64), std::vector<double>(h, 0.0)};
  Dense b{10, h, std::vector<double>(10 * h), std::vector<double>(10, 0.0)};
  for (double& w : a.weights) w = 0.1 * gen.normal();
  for (double& w : b.weights) w = 0.1 * gen.normal();
  const NeuralModel m(64, 10, {a, Relu{}, Dropout{0.2}, b, Softmax{}});
  const TraceMatrix x = gaussian(500, 64, 9);
  for (auto _ : state) benchmark::DoNotOptimize(predict_batch(m, x, 20, 1, exec_of(state)));
}
BENCHMARK(BM_PredictPasses)->Arg(0)->Arg(1)->ArgNames({"omp"});

}  // namespace

BENCHMARK_MAIN();
