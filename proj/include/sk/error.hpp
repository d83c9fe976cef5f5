#pragma once

#include <stdexcept>
#include <string>

namespace sk {

// Every toolkit failure derives from Error; kind() is a stable machine tag
// printed by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("IoError", what) {}
};

// ATRC parse/validation failure. reason() is one of
// "magic", "length", "dtype", "version", "finite", "shape".
class FormatError : public Error {
 public:
  FormatError(std::string reason, const std::string& what)
      : Error("FormatError", reason + ": " + what), reason_(std::move(reason)) {}
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

class ManifestError : public Error {
 public:
  ManifestError(std::string entry, const std::string& what)
      : Error("ManifestError", "entry '" + entry + "': " + what), entry_(std::move(entry)) {}
  const std::string& entry() const noexcept { return entry_; }

 private:
  std::string entry_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("ShapeError", what) {}
};

class InsufficientData : public Error {
 public:
  explicit InsufficientData(const std::string& what) : Error("InsufficientData", what) {}
};

class DegenerateData : public Error {
 public:
  explicit DegenerateData(const std::string& what) : Error("DegenerateData", what) {}
};

class SingularCovariance : public Error {
 public:
  explicit SingularCovariance(const std::string& what) : Error("SingularCovariance", what) {}
};

class ModelFormatError : public Error {
 public:
  explicit ModelFormatError(const std::string& what) : Error("ModelFormatError", what) {}
};

class NotKillable : public Error {
 public:
  explicit NotKillable(const std::string& what) : Error("NotKillable", what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("InvalidArgument", what) {}
};

}  // namespace sk
