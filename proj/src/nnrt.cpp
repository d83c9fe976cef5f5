#include "sk/nnrt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sk/error.hpp"
#include "sk/kernels.hpp"
#include "sk/rng.hpp"

namespace sk {

namespace fs = std::filesystem;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

NeuralModel::NeuralModel(std::size_t input_dim, std::size_t num_classes, std::vector<Layer> layers)
    : input_dim_(input_dim), num_classes_(num_classes), layers_(std::move(layers)) {
  if (input_dim_ < 1) throw ModelFormatError("input_dim must be >= 1");
  if (num_classes_ < 2) throw ModelFormatError("num_classes must be >= 2");
  if (layers_.empty()) throw ModelFormatError("model has no layers");
  bool found = false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (std::holds_alternative<Dense>(layers_[i])) {
      final_dense_ = i;
      found = true;
    }
  }
  if (!found) throw ModelFormatError("model has no dense layer");

  std::size_t width = input_dim_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string where = "layer " + std::to_string(i);
    std::visit(Overloaded{
                   [&](const Dense& d) {
                     if (d.in != width) {
                       throw ShapeError(where + " expects " + std::to_string(d.in) + " inputs but receives " +
                                        std::to_string(width));
                     }
                     if (d.out < 1 || d.weights.size() != d.out * d.in || d.bias.size() != d.out) {
                       throw ModelFormatError(where + " has inconsistent weight/bias sizes");
                     }
                     for (double v : d.weights) {
                       if (!std::isfinite(v)) throw ModelFormatError(where + " has non-finite weights");
                     }
                     for (double v : d.bias) {
                       if (!std::isfinite(v)) throw ModelFormatError(where + " has non-finite bias");
                     }
                     width = d.out;
                   },
                   [&](const Relu&) {
                     if (i > final_dense_) throw ModelFormatError(where + ": only softmax may follow the final dense layer");
                   },
                   [&](const Dropout& d) {
                     if (!(d.rate >= 0.0 && d.rate < 1.0)) throw ModelFormatError(where + ": dropout rate must be in [0, 1)");
                     if (i > final_dense_) throw ModelFormatError(where + ": only softmax may follow the final dense layer");
                   },
                   [&](const Softmax&) {
                     if (i + 1 != layers_.size()) throw ModelFormatError(where + ": softmax must be the final layer");
                   },
               },
               layers_[i]);
  }
  if (width != num_classes_) {
    throw ShapeError("final dense layer produces " + std::to_string(width) + " outputs, num_classes is " +
                     std::to_string(num_classes_));
  }
}

std::size_t NeuralModel::penultimate_dim() const noexcept { return std::get<Dense>(layers_[final_dense_]).in; }

NeuralModel model_from_json(const nlohmann::json& j) {
  try {
    const auto input_dim = j.at("input_dim").get<long long>();
    const auto num_classes = j.at("num_classes").get<long long>();
    if (input_dim < 1 || num_classes < 1) throw ModelFormatError("input_dim and num_classes must be positive");
    std::vector<Layer> layers;
    for (const auto& jl : j.at("layers")) {
      const auto kind = jl.at("kind").get<std::string>();
      if (kind == "dense") {
        Dense d;
        const auto rows = jl.at("weights").get<std::vector<std::vector<double>>>();
        d.out = rows.size();
        d.in = rows.empty() ? 0 : rows.front().size();
        for (const auto& r : rows) {
          if (r.size() != d.in) throw ModelFormatError("ragged dense weight matrix");
          d.weights.insert(d.weights.end(), r.begin(), r.end());
        }
        d.bias = jl.at("bias").get<std::vector<double>>();
        layers.emplace_back(std::move(d));
      } else if (kind == "relu") {
        layers.emplace_back(Relu{});
      } else if (kind == "dropout") {
        layers.emplace_back(Dropout{jl.at("rate").get<double>()});
      } else if (kind == "softmax") {
        layers.emplace_back(Softmax{});
      } else {
        throw ModelFormatError("unknown layer kind '" + kind + "'");
      }
    }
    return NeuralModel(static_cast<std::size_t>(input_dim), static_cast<std::size_t>(num_classes), std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("schema violation: ") + e.what());
  }
}

NeuralModel load_model(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("invalid JSON: ") + e.what());
  }
  return model_from_json(j);
}

nlohmann::json model_to_json(const NeuralModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : model.layers()) {
    std::visit(Overloaded{
                   [&](const Dense& d) {
                     nlohmann::json rows = nlohmann::json::array();
                     for (std::size_t r = 0; r < d.out; ++r) {
                       rows.push_back(std::vector<double>(d.weights.begin() + static_cast<std::ptrdiff_t>(r * d.in),
                                                          d.weights.begin() + static_cast<std::ptrdiff_t>((r + 1) * d.in)));
                     }
                     layers.push_back({{"kind", "dense"}, {"weights", rows}, {"bias", d.bias}});
                   },
                   [&](const Relu&) { layers.push_back({{"kind", "relu"}}); },
                   [&](const Dropout& d) { layers.push_back({{"kind", "dropout"}, {"rate", d.rate}}); },
                   [&](const Softmax&) { layers.push_back({{"kind", "softmax"}}); },
               },
               layer);
  }
  return {{"input_dim", model.input_dim()}, {"num_classes", model.num_classes()}, {"layers", layers}};
}

void save_model(const NeuralModel& model, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << model_to_json(model).dump() << '\n';
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

int argmax(std::span<const double> values) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<int>(best);
}

ForwardResult forward(const NeuralModel& model, std::span<const double> x, std::optional<std::uint64_t> dropout_seed) {
  if (x.size() != model.input_dim()) {
    throw ShapeError("input has length " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(model.input_dim()));
  }
  std::vector<double> act(x.begin(), x.end());
  std::vector<double> next;
  ForwardResult result;
  const auto& layers = model.layers();
  for (std::size_t li = 0; li < layers.size(); ++li) {
    if (li == model.final_dense_index()) result.penultimate = act;
    std::visit(Overloaded{
                   [&](const Dense& d) {
                     next.assign(d.bias.begin(), d.bias.end());
                     for (std::size_t r = 0; r < d.out; ++r) {
                       const double* w = d.weights.data() + r * d.in;
                       double acc = 0.0;
                       for (std::size_t c = 0; c < d.in; ++c) acc += w[c] * act[c];
                       next[r] += acc;
                     }
                     act.swap(next);
                   },
                   [&](const Relu&) {
                     for (double& v : act) v = v > 0.0 ? v : 0.0;
                   },
                   [&](const Dropout& d) {
                     if (!dropout_seed || d.rate == 0.0) return;
                     const double scale = 1.0 / (1.0 - d.rate);
                     for (std::size_t u = 0; u < act.size(); ++u) {
                       const bool drop = rng::to_unit(rng::derive(*dropout_seed, {li, u})) < d.rate;
                       act[u] = drop ? 0.0 : act[u] * scale;
                     }
                   },
                   [&](const Softmax&) {},
               },
               layers[li]);
    if (li == model.final_dense_index()) result.logits = act;
  }
  result.probabilities = softmax(result.logits);
  result.predicted = argmax(result.logits);
  return result;
}

BatchPrediction predict_batch(const NeuralModel& model, const TraceMatrix& inputs, std::size_t passes,
                              std::optional<std::uint64_t> dropout_seed, Exec exec) {
  if (passes < 1) throw InvalidArgument("passes must be >= 1");
  if (inputs.cols() != model.input_dim() && inputs.rows() > 0) {
    throw ShapeError("inputs have " + std::to_string(inputs.cols()) + " columns, model expects " +
                     std::to_string(model.input_dim()));
  }
  BatchPrediction out;
  out.passes = passes;
  out.n = inputs.rows();
  out.predictions.assign(passes * out.n, 0);
  out.penultimate = TraceMatrix(out.n, model.penultimate_dim());
  if (exec == Exec::parallel) {
    kernels::omp::predict_passes(model, inputs, passes, dropout_seed, out.predictions, out.penultimate);
  } else {
    kernels::serial::predict_passes(model, inputs, passes, dropout_seed, out.predictions, out.penultimate);
  }
  return out;
}

}  // namespace sk
