#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace transrate {

enum class ErrorKind {
  InvalidArgument,
  // numeric
  NumericOverflow,
  NumericFailure,
  SingularCovariance,
  // degenerate data
  EmptyClass,
  DegenerateLabels,
  TooFewSamples,
  ZeroKernel,
  ZeroVariance,
  AllTied,
  MixedConfig,
  DimensionTooHigh,
  // file formats and I/O
  BadMagic,
  VersionUnsupported,
  TruncatedFile,
  RaggedCsv,
  NonFiniteValue,
  NonInteger,
  EmptyFile,
  BadManifest,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Process exit code for an error: 1 usage, 2 I/O, 3 numeric, 4 degenerate data.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

using WarningHandler = std::function<void(std::string_view)>;

/// Replaces the process-wide warning sink and returns the previous one.
/// The default sink writes "warning: <msg>" lines to stderr.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

}  // namespace transrate
