#pragma once

#include <cstdint>
#include <vector>

#include "sk/rng.hpp"
#include "sk/trace_store.hpp"

namespace sk::scenario {

inline constexpr std::size_t kDim = 16;
inline constexpr std::size_t kComponents = 3;
inline constexpr double kShift = 6.0;

// Component means are fixed by the scenario seed so that independent draws
// share one mixture.
struct Mixture {
  std::vector<double> means;  // kComponents x kDim

  explicit Mixture(std::uint64_t seed) : means(kComponents * kDim) {
    rng::SplitMix64 gen(rng::derive(seed, {0}));
    for (double& m : means) m = 3.0 * gen.normal();
  }

  TraceMatrix draw(std::size_t n, std::uint64_t seed, double shift = 0.0,
                   std::vector<int>* component = nullptr) const {
    rng::SplitMix64 gen(seed);
    TraceMatrix m(n, kDim);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = gen.below(kComponents);
      if (component) component->push_back(static_cast<int>(c));
      for (std::size_t j = 0; j < kDim; ++j) m(i, j) = means[c * kDim + j] + gen.normal() + shift;
    }
    return m;
  }
};

struct Draw {
  TraceMatrix reference_a;
  TraceMatrix reference_b;
  TraceMatrix test;        // first half in-distribution, second half shifted
  std::vector<bool> shifted;
};

inline Draw make(std::uint64_t seed, std::size_t n_ref = 500, std::size_t n_test = 400) {
  const Mixture mix(seed);
  Draw d;
  d.reference_a = mix.draw(n_ref, rng::derive(seed, {1}));
  d.reference_b = mix.draw(n_ref, rng::derive(seed, {2}));
  const TraceMatrix in = mix.draw(n_test / 2, rng::derive(seed, {3}));
  const TraceMatrix out = mix.draw(n_test - n_test / 2, rng::derive(seed, {4}), kShift);
  d.test = TraceMatrix(n_test, kDim);
  std::copy(in.data().begin(), in.data().end(), d.test.data().begin());
  std::copy(out.data().begin(), out.data().end(), d.test.data().begin() + in.data().size());
  d.shifted.resize(n_test);
  for (std::size_t i = 0; i < n_test; ++i) d.shifted[i] = i >= n_test / 2;
  return d;
}

// Stub classifier: right on 99% of in-distribution rows and 20% of shifted rows.
inline std::vector<bool> stub_correctness(const Draw& d, std::uint64_t seed) {
  std::vector<bool> correct(d.shifted.size());
  for (std::size_t i = 0; i < correct.size(); ++i) {
    const double u = rng::uniform_at(rng::derive(seed, {5, i}));
    correct[i] = u < (d.shifted[i] ? 0.2 : 0.99);
  }
  return correct;
}

}  // namespace sk::scenario
