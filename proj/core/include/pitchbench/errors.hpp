#ifndef PITCHBENCH_ERRORS_HPP
#define PITCHBENCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pitchbench {

enum class ErrorCategory {
  parameter,
  generation_failure,
  measurement_failed,
  external_failure,
  format,
  timeout,
  io,
  config,
  index_undefined,
  nothing_to_report,
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::parameter: return "parameter";
    case ErrorCategory::generation_failure: return "generation-failure";
    case ErrorCategory::measurement_failed: return "measurement-failed";
    case ErrorCategory::external_failure: return "external-failure";
    case ErrorCategory::format: return "format";
    case ErrorCategory::timeout: return "timeout";
    case ErrorCategory::io: return "io";
    case ErrorCategory::config: return "config";
    case ErrorCategory::index_undefined: return "index-undefined";
    case ErrorCategory::nothing_to_report: return "nothing-to-report";
  }
  return "unknown";
}

class BenchError : public std::runtime_error {
 public:
  BenchError(ErrorCategory category, const std::string& msg)
      : std::runtime_error(msg), category_(category) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

class ParameterError : public BenchError {
 public:
  explicit ParameterError(const std::string& msg)
      : BenchError(ErrorCategory::parameter, msg) {}
};

/// Signal construction did not meet its envelope contract; carries the
/// achieved energy ratio so the caller can retry with another seed.
class GenerationError : public BenchError {
 public:
  GenerationError(const std::string& msg, double achieved_ratio)
      : BenchError(ErrorCategory::generation_failure, msg),
        achieved_ratio_(achieved_ratio) {}
  double achieved_ratio() const { return achieved_ratio_; }

 private:
  double achieved_ratio_;
};

class MeasurementError : public BenchError {
 public:
  MeasurementError(const std::string& msg, double missing_fraction)
      : BenchError(ErrorCategory::measurement_failed, msg),
        missing_fraction_(missing_fraction) {}
  double missing_fraction() const { return missing_fraction_; }

 private:
  double missing_fraction_;
};

class ExternalError : public BenchError {
 public:
  explicit ExternalError(const std::string& msg)
      : BenchError(ErrorCategory::external_failure, msg) {}
};

class FormatError : public BenchError {
 public:
  FormatError(const std::string& msg, long line)
      : BenchError(ErrorCategory::format, msg), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

class TimeoutError : public BenchError {
 public:
  explicit TimeoutError(const std::string& msg)
      : BenchError(ErrorCategory::timeout, msg) {}
};

class IoError : public BenchError {
 public:
  explicit IoError(const std::string& msg)
      : BenchError(ErrorCategory::io, msg) {}
};

class ConfigError : public BenchError {
 public:
  explicit ConfigError(const std::string& msg)
      : BenchError(ErrorCategory::config, msg) {}
};

class IndexUndefinedError : public BenchError {
 public:
  explicit IndexUndefinedError(const std::string& msg)
      : BenchError(ErrorCategory::index_undefined, msg) {}
};

class NothingToReportError : public BenchError {
 public:
  explicit NothingToReportError(const std::string& msg)
      : BenchError(ErrorCategory::nothing_to_report, msg) {}
};

}  // namespace pitchbench

#endif  // PITCHBENCH_ERRORS_HPP
