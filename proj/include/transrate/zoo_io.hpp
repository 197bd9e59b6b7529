#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "transrate/matcore.hpp"
#include "transrate/transrate.hpp"

namespace transrate {

// RawBinary layout, all little-endian:
//   bytes 0-3   magic "TRFM" (54 52 46 4D)
//   bytes 4-7   u32 version (1)
//   bytes 8-15  u64 n (rows)
//   bytes 16-23 u64 d (columns)
//   then n * d IEEE-754 binary32 values, row-major
inline constexpr char kRawMagic[4] = {'T', 'R', 'F', 'M'};
inline constexpr std::uint32_t kRawVersion = 1;
inline constexpr std::size_t kRawHeaderSize = 24;

enum class FeatureFormat { RawBinary, Csv };

/// ".csv" (any case) selects Csv; everything else is RawBinary.
FeatureFormat detect_feature_format(const std::filesystem::path& path);

std::string encode_raw_binary(const Matrix& m);
Matrix decode_raw_binary(std::string_view bytes);

/// One sample per line, comma separated. A first line whose first token is
/// not a number is treated as a header.
Matrix parse_csv_matrix(std::string_view text);
std::string format_csv_matrix(const Matrix& m);

FeatureMatrix read_feature_file(const std::filesystem::path& path, FeatureFormat format);
FeatureMatrix read_feature_file(const std::filesystem::path& path);
void write_feature_file(const std::filesystem::path& path, const Matrix& m, FeatureFormat format);

/// Reads any RawBinary/Csv matrix without the FeatureMatrix invariants
/// (used for pseudo-label files).
Matrix read_matrix_file(const std::filesystem::path& path);

/// One value per line (LF or CRLF). Classification: non-negative integers
/// with C = max + 1. Regression: finite decimals.
LabelVector parse_labels(std::string_view text, LabelKind kind);
LabelVector read_labels(const std::filesystem::path& path, LabelKind kind);
void write_labels(const std::filesystem::path& path, const LabelVector& labels);

struct ModelEntry {
  std::string name;
  std::filesystem::path features_path;
  std::optional<std::filesystem::path> labels_path;
  std::optional<std::filesystem::path> pseudo_labels_path;
};

/// JSON manifest describing a model zoo for one target task:
///   {"task_kind": "classification" | "regression",
///    "labels_path": "...",            (optional, shared by all models)
///    "accuracy_path": "...",          (optional)
///    "models": [{"name": "...", "features_path": "...",
///                "labels_path": "...", "pseudo_labels_path": "..."}]}
/// Relative paths are resolved against the manifest's directory.
struct ZooManifest {
  LabelKind task_kind = LabelKind::Classification;
  std::optional<std::filesystem::path> labels_path;
  std::optional<std::filesystem::path> accuracy_path;
  std::vector<ModelEntry> models;

  /// Labels path for a model: its own, else the shared one.
  const std::filesystem::path& labels_for(const ModelEntry& model) const;
};

ZooManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir);
ZooManifest read_manifest(const std::filesystem::path& path);
std::string format_manifest(const ZooManifest& manifest);

/// "name,accuracy" rows, optional header.
std::vector<std::pair<std::string, double>> parse_accuracies(std::string_view text);
std::vector<std::pair<std::string, double>> read_accuracies(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace transrate
