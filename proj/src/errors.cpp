#include "transrate/errors.hpp"

#include <iostream>
#include <mutex>

namespace transrate {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NumericOverflow: return "NumericOverflow";
    case ErrorKind::NumericFailure: return "NumericFailure";
    case ErrorKind::SingularCovariance: return "SingularCovariance";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::ZeroKernel: return "ZeroKernel";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::AllTied: return "AllTied";
    case ErrorKind::MixedConfig: return "MixedConfig";
    case ErrorKind::DimensionTooHigh: return "DimensionTooHigh";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::VersionUnsupported: return "VersionUnsupported";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::RaggedCsv: return "RaggedCsv";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::NonInteger: return "NonInteger";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::BadManifest: return "BadManifest";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::MixedConfig:
      return 1;
    case ErrorKind::BadMagic:
    case ErrorKind::VersionUnsupported:
    case ErrorKind::TruncatedFile:
    case ErrorKind::RaggedCsv:
    case ErrorKind::NonFiniteValue:
    case ErrorKind::NonInteger:
    case ErrorKind::EmptyFile:
    case ErrorKind::BadManifest:
    case ErrorKind::Io:
      return 2;
    case ErrorKind::NumericOverflow:
    case ErrorKind::NumericFailure:
    case ErrorKind::SingularCovariance:
      return 3;
    case ErrorKind::EmptyClass:
    case ErrorKind::DegenerateLabels:
    case ErrorKind::TooFewSamples:
    case ErrorKind::ZeroKernel:
    case ErrorKind::ZeroVariance:
    case ErrorKind::AllTied:
    case ErrorKind::DimensionTooHigh:
      return 4;
  }
  return 1;
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      detail_(message) {}

namespace {

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& warning_handler() {
  static WarningHandler handler = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return handler;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warning_mutex());
  auto previous = std::move(warning_handler());
  warning_handler() = std::move(handler);
  return previous;
}

void warn(std::string_view message) {
  std::lock_guard lock(warning_mutex());
  if (warning_handler()) warning_handler()(message);
}

}  // namespace transrate
