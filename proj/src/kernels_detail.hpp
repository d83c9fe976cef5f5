#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sk/kernels.hpp"

// Per-item bodies shared by the serial and OpenMP loops.
namespace sk::kernels::detail {

void project_row(std::span<const double> src, std::span<const double> mean, std::span<const double> components,
                 std::size_t k, std::span<double> dst);
double gaussian_sum(std::span<const double> samples, double bandwidth, double x);
bool permutation_trial(const PermutationTask& task, std::size_t trial, std::vector<double>& buffer);
void predict_one(const NeuralModel& model, const TraceMatrix& inputs, std::size_t pass, std::size_t i,
                 std::optional<std::uint64_t> seed, std::span<int> predictions, TraceMatrix& penultimate);

}  // namespace sk::kernels::detail
