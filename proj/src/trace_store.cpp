#include "sk/trace_store.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>

#include "sk/error.hpp"

namespace sk {

namespace fs = std::filesystem;

TraceMatrix::TraceMatrix(std::size_t rows, std::size_t cols, Dtype dtype)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0), dtype_(dtype) {}

TraceMatrix::TraceMatrix(std::size_t rows, std::size_t cols, std::vector<double> data, Dtype dtype)
    : rows_(rows), cols_(cols), data_(std::move(data)), dtype_(dtype) {
  if (data_.size() != rows * cols) {
    throw ShapeError("trace matrix data has " + std::to_string(data_.size()) + " values, expected " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

bool TraceMatrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

TraceMatrix TraceMatrix::select_rows(std::span<const std::size_t> indices) const {
  TraceMatrix out(indices.size(), cols_, dtype_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw ShapeError("row index out of range");
    auto src = row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

namespace {

constexpr std::uint8_t kMagic[4] = {0x41, 0x54, 0x52, 0x43};

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U value) {
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<std::uint8_t>(value >> (8 * b)));
}

template <typename U>
U get_le(const std::uint8_t* p) {
  U value = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) value |= static_cast<U>(p[b]) << (8 * b);
  return value;
}

std::size_t dtype_size(Dtype d) { return d == Dtype::f32 ? 4 : 8; }

void check_writable(const TraceMatrix& m) {
  if (m.cols() == 0) throw FormatError("shape", "trace matrix must have at least one column");
  if (!m.all_finite()) throw FormatError("finite", "trace matrix contains NaN or Inf");
}

AtrcHeader parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw FormatError("magic", "missing ATRC magic");
  }
  if (bytes.size() < kAtrcHeaderSize) throw FormatError("length", "truncated header");
  const std::uint8_t* p = bytes.data();
  AtrcHeader h;
  h.version = get_le<std::uint16_t>(p + 4);
  if (h.version != 1) throw FormatError("version", "unsupported version " + std::to_string(h.version));
  const std::uint8_t code = p[6];
  if (code != 1 && code != 2) throw FormatError("dtype", "unknown dtype code " + std::to_string(code));
  h.dtype = static_cast<Dtype>(code);
  h.rows = get_le<std::uint64_t>(p + 8);
  h.cols = get_le<std::uint64_t>(p + 16);
  // bytes 24..27 are reserved padding and must be zero-filled by writers
  if (h.cols == 0) throw FormatError("shape", "cols must be >= 1");
  return h;
}

std::vector<std::uint8_t> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::vector<std::uint8_t> encode_trace_matrix(const TraceMatrix& m) {
  check_writable(m);
  std::vector<std::uint8_t> out;
  out.reserve(kAtrcHeaderSize + m.data().size() * dtype_size(m.dtype()));
  for (std::uint8_t c : kMagic) out.push_back(c);
  put_le<std::uint16_t>(out, 1);
  out.push_back(static_cast<std::uint8_t>(m.dtype()));
  out.push_back(0);  // flags
  put_le<std::uint64_t>(out, m.rows());
  put_le<std::uint64_t>(out, m.cols());
  put_le<std::uint32_t>(out, 0);
  if (m.dtype() == Dtype::f32) {
    for (double v : m.data()) put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  } else {
    for (double v : m.data()) put_le(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

TraceMatrix decode_trace_matrix(std::span<const std::uint8_t> bytes) {
  const AtrcHeader h = parse_header(bytes);
  const std::size_t width = dtype_size(h.dtype);
  const std::size_t payload = bytes.size() - kAtrcHeaderSize;
  if (h.rows > payload / width / h.cols || h.rows * h.cols * width != payload) {
    throw FormatError("length", "header declares " + std::to_string(h.rows) + "x" + std::to_string(h.cols) +
                                    " values but payload holds " + std::to_string(payload) + " bytes");
  }
  std::vector<double> data(h.rows * h.cols);
  const std::uint8_t* p = bytes.data() + kAtrcHeaderSize;
  for (std::size_t i = 0; i < data.size(); ++i, p += width) {
    data[i] = h.dtype == Dtype::f32 ? static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(p)))
                                    : std::bit_cast<double>(get_le<std::uint64_t>(p));
    if (!std::isfinite(data[i])) throw FormatError("finite", "non-finite value at index " + std::to_string(i));
  }
  return TraceMatrix(h.rows, h.cols, std::move(data), h.dtype);
}

void write_trace_matrix(const TraceMatrix& m, const fs::path& path) {
  const auto bytes = encode_trace_matrix(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

TraceMatrix read_trace_matrix(const fs::path& path) {
  const auto bytes = slurp(path);
  return decode_trace_matrix(bytes);
}

AtrcHeader read_trace_header(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::uint8_t buf[kAtrcHeaderSize];
  in.read(reinterpret_cast<char*>(buf), kAtrcHeaderSize);
  const auto got = static_cast<std::size_t>(in.gcount());
  const AtrcHeader h = parse_header({buf, got});
  const auto size = fs::file_size(path);
  if (size != kAtrcHeaderSize + h.rows * h.cols * dtype_size(h.dtype)) {
    throw FormatError("length", path.string() + " size does not match its header");
  }
  return h;
}

void LabelVector::validate() const {
  if (num_classes < 2) throw InvalidArgument("num_classes must be >= 2");
  for (int v : values) {
    if (v < 0 || v >= num_classes) {
      throw ShapeError("label " + std::to_string(v) + " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

void write_labels(const LabelVector& labels, const fs::path& path) {
  labels.validate();
  TraceMatrix m(labels.size(), 1, Dtype::f32);
  for (std::size_t i = 0; i < labels.size(); ++i) m(i, 0) = labels.values[i];
  write_trace_matrix(m, path);
}

LabelVector read_labels(const fs::path& path, int num_classes) {
  const TraceMatrix m = read_trace_matrix(path);
  if (m.cols() != 1) throw FormatError("shape", path.string() + " is not a label file (cols != 1)");
  LabelVector out;
  out.num_classes = num_classes;
  out.values.reserve(m.rows());
  for (double v : m.data()) out.values.push_back(static_cast<int>(std::lround(v)));
  out.validate();
  return out;
}

LabelVector read_labels(const fs::path& path) {
  const TraceMatrix m = read_trace_matrix(path);
  int top = 1;
  for (double v : m.data()) top = std::max(top, static_cast<int>(std::lround(v)));
  return read_labels(path, top + 1);
}

const ManifestEntry* DatasetManifest::find(const std::string& label) const noexcept {
  for (const auto& e : entries) {
    if (e.label == label) return &e;
  }
  return nullptr;
}

namespace {

std::size_t rows_of(const ManifestEntry& e, const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw ManifestError(e.label, std::string(what) + " file missing: " + p.string());
  try {
    return read_trace_header(p).rows;
  } catch (const Error& err) {
    throw ManifestError(e.label, std::string(what) + " file unreadable: " + err.what());
  }
}

}  // namespace

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("<manifest>", "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError("<manifest>", std::string("invalid JSON: ") + e.what());
  }
  const fs::path base = path.parent_path();
  DatasetManifest m;
  std::set<int> seen;
  try {
    m.name = j.at("name").get<std::string>();
    for (const auto& je : j.at("entries")) {
      ManifestEntry e;
      e.label = je.at("label").get<std::string>();
      e.class_index = je.at("class_index").get<int>();
      e.trace_path = base / je.at("trace_path").get<std::string>();
      if (je.contains("logits_path") && !je["logits_path"].is_null())
        e.logits_path = base / je["logits_path"].get<std::string>();
      if (je.contains("true_labels_path") && !je["true_labels_path"].is_null())
        e.true_labels_path = base / je["true_labels_path"].get<std::string>();
      const auto count = je.at("count").get<long long>();
      if (count < 0) throw ManifestError(e.label, "negative count");
      e.count = static_cast<std::size_t>(count);
      if (!seen.insert(e.class_index).second) {
        throw ManifestError(e.label, "duplicate class_index " + std::to_string(e.class_index));
      }
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError("<manifest>", std::string("schema violation: ") + e.what());
  }
  for (const auto& e : m.entries) {
    const auto check = [&](const fs::path& p, const char* what) {
      const auto rows = rows_of(e, p, what);
      if (rows != e.count) {
        throw ManifestError(e.label, std::string(what) + " has " + std::to_string(rows) + " rows but count is " +
                                         std::to_string(e.count));
      }
    };
    check(e.trace_path, "trace");
    if (e.logits_path) check(*e.logits_path, "logits");
    if (e.true_labels_path) check(*e.true_labels_path, "true_labels");
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  const auto rel = [&](const fs::path& p) { return fs::relative(p, base).generic_string(); };
  nlohmann::json j;
  j["name"] = manifest.name;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    nlohmann::json je;
    je["label"] = e.label;
    je["class_index"] = e.class_index;
    je["trace_path"] = rel(e.trace_path);
    je["logits_path"] = e.logits_path ? nlohmann::json(rel(*e.logits_path)) : nlohmann::json(nullptr);
    je["true_labels_path"] = e.true_labels_path ? nlohmann::json(rel(*e.true_labels_path)) : nlohmann::json(nullptr);
    je["count"] = e.count;
    j["entries"].push_back(std::move(je));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace sk
