#pragma once

#include <cstddef>
#include <vector>

#include "sk/nnrt.hpp"
#include "sk/prioritize.hpp"
#include "sk/surprise.hpp"

namespace sk {

// Penultimate-layer activations of `inputs`, inference mode.
TraceMatrix penultimate_traces(const NeuralModel& model, const TraceMatrix& inputs, Exec exec = Exec::parallel);

struct PrioritizedSubset {
  LsaScores scores;
  Ranking ranking;
  std::vector<bool> correct;  // original model, inference mode
  Selection selection;
};

// Fits LSA on the reference inputs' traces, ranks the test inputs by
// descending LSA and keeps the first k that the model classifies correctly.
PrioritizedSubset prioritize_for_kill(const NeuralModel& model, const TraceMatrix& reference_inputs,
                                      const TraceMatrix& test_inputs, const LabelVector& truth, std::size_t k,
                                      const DensityConfig& config, Exec exec = Exec::parallel);

}  // namespace sk
