#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clacorr {

// Coarse failure class, used by the CLI to pick an exit status and by the
// machine-readable error record.  "usage" covers bad invocations and bad
// config, "data" covers malformed or inconsistent input files, "numeric"
// covers conditions detected during computation (degenerate input, failed
// factorizations, out-of-domain parameters).
enum class ErrorClass { usage = 2, data = 3, numeric = 4 };

class Error : public std::runtime_error {
public:
  Error(std::string name, ErrorClass cls, const std::string& message)
      : std::runtime_error(message), name_(std::move(name)), class_(cls) {}

  const std::string& name() const noexcept { return name_; }
  ErrorClass error_class() const noexcept { return class_; }
  int exit_code() const noexcept { return static_cast<int>(class_); }

private:
  std::string name_;
  ErrorClass class_;
};

// A series (or derived series) has zero variance, so correlations with it
// are undefined.  `context` names the offending voxel/cluster/series.
class ZeroVarianceError : public Error {
public:
  explicit ZeroVarianceError(const std::string& context)
      : Error("zero_variance", ErrorClass::numeric,
              "zero variance series: " + context),
        context_(context) {}
  const std::string& context() const noexcept { return context_; }

private:
  std::string context_;
};

// A numeric argument is outside its mathematical domain.
class DomainError : public Error {
public:
  explicit DomainError(const std::string& message)
      : Error("domain", ErrorClass::numeric, message) {}
};

// Matrix/vector dimensions do not line up.
class ShapeError : public Error {
public:
  explicit ShapeError(const std::string& message)
      : Error("shape", ErrorClass::numeric, message) {}
};

// A covariance matrix failed its positive semi-definiteness check even after
// jitter escalation; carries the offending minimum eigenvalue.
class NotPsdError : public Error {
public:
  NotPsdError(const std::string& message, double min_eigenvalue)
      : Error("not_psd", ErrorClass::numeric, message),
        min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
  double min_eigenvalue_;
};

// No admissible clustering exists for the request (e.g. no cut of the
// dendrogram yields a cluster count in the candidate range).
class DegenerateClusteringError : public Error {
public:
  explicit DegenerateClusteringError(const std::string& message)
      : Error("degenerate_clustering", ErrorClass::numeric, message) {}
};

// A synthetic-scenario geometry cannot be constructed as requested.
class GeometryError : public Error {
public:
  explicit GeometryError(const std::string& message)
      : Error("geometry", ErrorClass::data, message) {}
};

// Malformed input file.  Row and column are 1-based file coordinates; the
// header line counts as row 1.
class ParseError : public Error {
public:
  ParseError(const std::string& path, std::size_t row, std::size_t col,
             const std::string& what)
      : Error("parse", ErrorClass::data,
              path + ":" + std::to_string(row) + ":" + std::to_string(col) +
                  ": " + what),
        row_(row), col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

private:
  std::size_t row_;
  std::size_t col_;
};

// Inputs are individually well-formed but disagree with each other
// (e.g. a voxel present in the data but absent from the parcellation).
class ConsistencyError : public Error {
public:
  explicit ConsistencyError(const std::string& message)
      : Error("consistency", ErrorClass::data, message) {}
};

// Bad or missing configuration value.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& message)
      : Error("config", ErrorClass::usage, message) {}
};

}  // namespace clacorr
