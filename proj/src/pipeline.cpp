#include "sk/pipeline.hpp"

#include "sk/error.hpp"

namespace sk {

TraceMatrix penultimate_traces(const NeuralModel& model, const TraceMatrix& inputs, Exec exec) {
  return predict_batch(model, inputs, 1, std::nullopt, exec).penultimate;
}

PrioritizedSubset prioritize_for_kill(const NeuralModel& model, const TraceMatrix& reference_inputs,
                                      const TraceMatrix& test_inputs, const LabelVector& truth, std::size_t k,
                                      const DensityConfig& config, Exec exec) {
  if (test_inputs.rows() != truth.size()) throw ShapeError("test inputs and labels differ in length");
  const DensityModel density = fit_density_model(penultimate_traces(model, reference_inputs, exec), config, "reference");
  const BatchPrediction pred = predict_batch(model, test_inputs, 1, std::nullopt, exec);

  PrioritizedSubset out;
  out.scores = score_batch(density, pred.penultimate, "test", exec);
  out.ranking = rank_by_lsa(out.scores, Direction::Descending);
  out.correct.resize(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) out.correct[i] = pred.at(0, i) == truth.values[i];
  out.selection = select_top_k_correct(out.ranking, out.correct, k);
  return out;
}

}  // namespace sk
