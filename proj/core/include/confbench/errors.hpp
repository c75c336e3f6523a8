#ifndef CONFBENCH_ERRORS_HPP
#define CONFBENCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace confbench {

/// Base class for all library errors. `code()` is a stable, machine-parsable
/// identifier used by the CLI when reporting failures.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Tensor or layer shape does not conform. Message names both shapes.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& message) : Error("E_SHAPE", message) {}
};

/// Non-finite values or degenerate numeric input.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message) : Error("E_NUMERIC", message) {}
};

/// Class label or index out of range.
class IndexError : public Error {
 public:
  explicit IndexError(const std::string& message) : Error("E_INDEX", message) {}
};

/// Malformed file contents (IDX payload, checkpoint blob, CSV, ...).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message) : Error("E_FORMAT", message) {}
};

/// Filesystem failure distinct from malformed content.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("E_IO", message) {}
};

/// Invalid configuration value or schema violation. Messages carry the
/// config path of the offending entry.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("E_CONFIG", message) {}
};

/// Training diverged (non-finite loss) or was driven into an invalid state.
class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& message) : Error("E_TRAINING", message) {}
};

/// A required artifact (checkpoint, report) is missing.
class DependencyError : public Error {
 public:
  explicit DependencyError(const std::string& message) : Error("E_DEPENDENCY", message) {}
};

/// Metric undefined on the given input (e.g. single-class outcome set).
class MetricError : public Error {
 public:
  explicit MetricError(const std::string& message) : Error("E_METRIC", message) {}
};

/// A theoretical guarantee was violated; always indicates an implementation bug.
class GuaranteeViolation : public Error {
 public:
  explicit GuaranteeViolation(const std::string& message) : Error("E_GUARANTEE", message) {}
};

}  // namespace confbench

#endif  // CONFBENCH_ERRORS_HPP
