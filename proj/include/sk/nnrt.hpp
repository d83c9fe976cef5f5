#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sk/parallel.hpp"
#include "sk/trace_store.hpp"

namespace sk {

struct Dense {
  std::size_t out = 0;
  std::size_t in = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;     // out

  double& w(std::size_t r, std::size_t c) noexcept { return weights[r * in + c]; }
  double w(std::size_t r, std::size_t c) const noexcept { return weights[r * in + c]; }
  friend bool operator==(const Dense&, const Dense&) = default;
};

struct Relu {
  friend bool operator==(const Relu&, const Relu&) = default;
};

// Inverted dropout: survivors are scaled by 1 / (1 - rate).
struct Dropout {
  double rate = 0.0;
  friend bool operator==(const Dropout&, const Dropout&) = default;
};

struct Softmax {
  friend bool operator==(const Softmax&, const Softmax&) = default;
};

using Layer = std::variant<Dense, Relu, Dropout, Softmax>;

class NeuralModel {
 public:
  NeuralModel() = default;
  // Validates the layer chain; throws ShapeError or ModelFormatError.
  NeuralModel(std::size_t input_dim, std::size_t num_classes, std::vector<Layer> layers);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  // Mutable access for weight-level operators; topology must not change.
  std::vector<Layer>& mutable_layers() noexcept { return layers_; }

  std::size_t final_dense_index() const noexcept { return final_dense_; }
  // Width of the activation vector entering the final Dense layer.
  std::size_t penultimate_dim() const noexcept;

  friend bool operator==(const NeuralModel&, const NeuralModel&) = default;

 private:
  std::size_t input_dim_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<Layer> layers_;
  std::size_t final_dense_ = 0;
};

NeuralModel load_model(const std::filesystem::path& path);
NeuralModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const NeuralModel& model);
void save_model(const NeuralModel& model, const std::filesystem::path& path);

struct ForwardResult {
  std::vector<double> logits;         // output of the final Dense layer
  std::vector<double> probabilities;  // softmax(logits)
  std::vector<double> penultimate;
  int predicted = 0;                  // argmax, ties -> smallest index
};

// Without a seed Dropout is the identity. With a seed, unit u of layer l is
// dropped iff uniform(seed, l, u) < rate; the mask does not depend on x.
ForwardResult forward(const NeuralModel& model, std::span<const double> x,
                      std::optional<std::uint64_t> dropout_seed = std::nullopt);

struct BatchPrediction {
  std::size_t passes = 0;
  std::size_t n = 0;
  std::vector<int> predictions;  // passes x n, row-major
  TraceMatrix penultimate;       // from pass 0

  int at(std::size_t pass, std::size_t i) const noexcept { return predictions[pass * n + i]; }
  std::span<const int> pass(std::size_t p) const noexcept { return {predictions.data() + p * n, n}; }
};

// Pass p draws its dropout mask from mix(dropout_seed, p).
BatchPrediction predict_batch(const NeuralModel& model, const TraceMatrix& inputs, std::size_t passes = 1,
                              std::optional<std::uint64_t> dropout_seed = std::nullopt, Exec exec = Exec::parallel);

std::vector<double> softmax(std::span<const double> logits);
int argmax(std::span<const double> values) noexcept;

}  // namespace sk
