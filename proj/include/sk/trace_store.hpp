#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sk {

enum class Dtype : std::uint8_t { f32 = 1, f64 = 2 };

// Row-major N x D matrix of activation traces. In memory every value is a
// double; dtype only records the on-disk precision.
class TraceMatrix {
 public:
  TraceMatrix() = default;
  TraceMatrix(std::size_t rows, std::size_t cols, Dtype dtype = Dtype::f32);
  TraceMatrix(std::size_t rows, std::size_t cols, std::vector<double> data, Dtype dtype = Dtype::f32);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Dtype dtype() const noexcept { return dtype_; }
  void set_dtype(Dtype dtype) noexcept { dtype_ = dtype; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  bool all_finite() const noexcept;

  // Rows listed in `indices`, in that order.
  TraceMatrix select_rows(std::span<const std::size_t> indices) const;

  friend bool operator==(const TraceMatrix&, const TraceMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 1;
  std::vector<double> data_;
  Dtype dtype_ = Dtype::f32;
};

struct AtrcHeader {
  std::uint16_t version = 1;
  Dtype dtype = Dtype::f32;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
};

inline constexpr std::size_t kAtrcHeaderSize = 28;

// Writes m in the ATRC layout using m.dtype(). Throws FormatError for
// non-finite values or cols == 0 before touching the filesystem.
void write_trace_matrix(const TraceMatrix& m, const std::filesystem::path& path);
TraceMatrix read_trace_matrix(const std::filesystem::path& path);
AtrcHeader read_trace_header(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_trace_matrix(const TraceMatrix& m);
TraceMatrix decode_trace_matrix(std::span<const std::uint8_t> bytes);

struct LabelVector {
  std::vector<int> values;
  int num_classes = 2;

  std::size_t size() const noexcept { return values.size(); }
  void validate() const;
};

// Labels live in an N x 1 f32 ATRC file; values are rounded on load.
void write_labels(const LabelVector& labels, const std::filesystem::path& path);
LabelVector read_labels(const std::filesystem::path& path, int num_classes);
// num_classes inferred as max(value) + 1 (at least 2).
LabelVector read_labels(const std::filesystem::path& path);

struct ManifestEntry {
  std::string label;
  int class_index = 0;
  std::filesystem::path trace_path;  // resolved against the manifest directory
  std::optional<std::filesystem::path> logits_path;
  std::optional<std::filesystem::path> true_labels_path;
  std::size_t count = 0;
};

struct DatasetManifest {
  std::string name;
  std::vector<ManifestEntry> entries;

  const ManifestEntry* find(const std::string& label) const noexcept;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
// Paths are written relative to the manifest's directory when possible.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace sk
