#include "transrate/zoo_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "transrate/errors.hpp"

namespace transrate {

namespace fs = std::filesystem;

namespace {

static_assert(std::numeric_limits<float>::is_iec559, "binary32 floats required");

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::string_view bytes, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    value |= static_cast<T>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view token) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec == std::errc::result_out_of_range) return std::numeric_limits<double>::infinity();
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return v;
}

// Splits into lines, accepting LF and CRLF, and drops a final empty line.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(',', start);
    out.push_back(line.substr(start, end == std::string_view::npos ? line.npos : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

FeatureFormat detect_feature_format(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv" ? FeatureFormat::Csv : FeatureFormat::RawBinary;
}

std::string encode_raw_binary(const Matrix& m) {
  std::string out;
  out.reserve(kRawHeaderSize + static_cast<std::size_t>(m.size()) * 4);
  out.append(kRawMagic, 4);
  put_le<std::uint32_t>(out, kRawVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(m(i, j))));
  return out;
}

Matrix decode_raw_binary(std::string_view bytes) {
  if (bytes.size() < 4) throw Error(ErrorKind::TruncatedFile, "file shorter than the magic bytes");
  if (std::memcmp(bytes.data(), kRawMagic, 4) != 0)
    throw Error(ErrorKind::BadMagic, "missing TRFM magic bytes");
  if (bytes.size() < kRawHeaderSize) throw Error(ErrorKind::TruncatedFile, "header is truncated");
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kRawVersion)
    throw Error(ErrorKind::VersionUnsupported, "version " + std::to_string(version));
  const auto n = get_le<std::uint64_t>(bytes, 8);
  const auto d = get_le<std::uint64_t>(bytes, 16);

  const std::uint64_t payload = bytes.size() - kRawHeaderSize;
  if (d != 0 && n > payload / 4 / d)
    throw Error(ErrorKind::TruncatedFile, "payload holds fewer than n*d values");
  if (payload != n * d * 4)
    throw Error(ErrorKind::TruncatedFile, "payload size does not match n*d values");

  Matrix m(static_cast<Index>(n), static_cast<Index>(d));
  std::size_t offset = kRawHeaderSize;
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < d; ++j, offset += 4) {
      const float v = std::bit_cast<float>(get_le<std::uint32_t>(bytes, offset));
      if (!std::isfinite(v))
        throw Error(ErrorKind::NonFiniteValue,
                    "row " + std::to_string(i) + ", column " + std::to_string(j));
      m(static_cast<Index>(i), static_cast<Index>(j)) = static_cast<double>(v);
    }
  return m;
}

Matrix parse_csv_matrix(std::string_view text) {
  auto lines = split_lines(text);
  std::erase_if(lines, [](std::string_view l) { return trim(l).empty(); });
  if (lines.empty()) throw Error(ErrorKind::EmptyFile, "CSV has no rows");

  std::size_t first = 0;
  if (!parse_double(split_commas(lines.front()).front())) first = 1;
  if (first == lines.size()) throw Error(ErrorKind::EmptyFile, "CSV has a header but no rows");

  const std::size_t cols = split_commas(lines[first]).size();
  Matrix m(static_cast<Index>(lines.size() - first), static_cast<Index>(cols));
  for (std::size_t r = first; r < lines.size(); ++r) {
    const auto tokens = split_commas(lines[r]);
    const std::size_t row = r - first;
    if (tokens.size() != cols)
      throw Error(ErrorKind::RaggedCsv, "row " + std::to_string(row) + " has " +
                                            std::to_string(tokens.size()) + " fields, expected " +
                                            std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = parse_double(tokens[c]);
      if (!v)
        throw Error(ErrorKind::RaggedCsv, "row " + std::to_string(row) + ", column " +
                                              std::to_string(c) + " is not a number");
      if (!std::isfinite(*v))
        throw Error(ErrorKind::NonFiniteValue,
                    "row " + std::to_string(row) + ", column " + std::to_string(c));
      m(static_cast<Index>(row), static_cast<Index>(c)) = *v;
    }
  }
  return m;
}

std::string format_csv_matrix(const Matrix& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out.push_back(',');
      out += format_number(m(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "cannot read " + path.string());
  return std::move(ss).str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

Matrix read_matrix_file(const fs::path& path) {
  const std::string bytes = read_file(path);
  try {
    return detect_feature_format(path) == FeatureFormat::Csv ? parse_csv_matrix(bytes)
                                                             : decode_raw_binary(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

FeatureMatrix read_feature_file(const fs::path& path, FeatureFormat format) {
  const std::string bytes = read_file(path);
  try {
    Matrix m = format == FeatureFormat::Csv ? parse_csv_matrix(bytes) : decode_raw_binary(bytes);
    if (m.rows() == 0 || m.cols() == 0)
      throw Error(ErrorKind::EmptyFile, "feature matrix has a zero dimension");
    return FeatureMatrix(std::move(m));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

FeatureMatrix read_feature_file(const fs::path& path) {
  return read_feature_file(path, detect_feature_format(path));
}

void write_feature_file(const fs::path& path, const Matrix& m, FeatureFormat format) {
  write_file(path, format == FeatureFormat::Csv ? format_csv_matrix(m) : encode_raw_binary(m));
}

LabelVector parse_labels(std::string_view text, LabelKind kind) {
  auto lines = split_lines(text);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorKind::EmptyFile, "label file is empty");

  if (kind == LabelKind::Classification) {
    std::vector<std::int32_t> ids;
    ids.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto token = trim(lines[i]);
      std::int32_t id = -1;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), id);
      if (token.empty() || ec != std::errc() || ptr != token.data() + token.size() || id < 0)
        throw Error(ErrorKind::NonInteger, "line " + std::to_string(i + 1) + ": '" +
                                               std::string(token) +
                                               "' is not a non-negative integer");
      ids.push_back(id);
    }
    return LabelVector::classification(std::move(ids));
  }

  std::vector<double> values;
  values.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto v = parse_double(lines[i]);
    if (!v)
      throw Error(ErrorKind::NonFiniteValue, "line " + std::to_string(i + 1) + " is not a number");
    if (!std::isfinite(*v))
      throw Error(ErrorKind::NonFiniteValue, "line " + std::to_string(i + 1) + " is not finite");
    values.push_back(*v);
  }
  return LabelVector::regression(std::move(values));
}

LabelVector read_labels(const fs::path& path, LabelKind kind) {
  const std::string text = read_file(path);
  try {
    return parse_labels(text, kind);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

void write_labels(const fs::path& path, const LabelVector& labels) {
  std::string out;
  if (labels.kind() == LabelKind::Classification) {
    for (auto id : labels.class_ids()) out += std::to_string(id) + "\n";
  } else {
    for (double v : labels.values()) out += format_number(v) + "\n";
  }
  write_file(path, out);
}

const fs::path& ZooManifest::labels_for(const ModelEntry& model) const {
  if (model.labels_path) return *model.labels_path;
  if (labels_path) return *labels_path;
  throw Error(ErrorKind::BadManifest, "model '" + model.name + "' has no labels");
}

ZooManifest parse_manifest(std::string_view json_text, const fs::path& base_dir) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadManifest, e.what());
  }
  auto resolve = [&](const json& v) -> fs::path {
    if (!v.is_string()) throw Error(ErrorKind::BadManifest, "paths must be strings");
    fs::path p = v.get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };

  if (!doc.is_object()) throw Error(ErrorKind::BadManifest, "manifest must be a JSON object");
  ZooManifest m;
  const std::string kind = doc.value("task_kind", "classification");
  if (kind == "classification")
    m.task_kind = LabelKind::Classification;
  else if (kind == "regression")
    m.task_kind = LabelKind::Regression;
  else
    throw Error(ErrorKind::BadManifest, "unknown task_kind '" + kind + "'");

  if (doc.contains("labels_path")) m.labels_path = resolve(doc["labels_path"]);
  if (doc.contains("accuracy_path")) m.accuracy_path = resolve(doc["accuracy_path"]);

  if (!doc.contains("models") || !doc["models"].is_array() || doc["models"].empty())
    throw Error(ErrorKind::BadManifest, "manifest lists no models");
  std::set<std::string> names;
  for (const auto& item : doc["models"]) {
    if (!item.is_object() || !item.contains("name") || !item["name"].is_string() ||
        !item.contains("features_path"))
      throw Error(ErrorKind::BadManifest, "each model needs a name and a features_path");
    ModelEntry e;
    e.name = item["name"].get<std::string>();
    if (!names.insert(e.name).second)
      throw Error(ErrorKind::BadManifest, "duplicate model name '" + e.name + "'");
    e.features_path = resolve(item["features_path"]);
    if (item.contains("labels_path")) e.labels_path = resolve(item["labels_path"]);
    if (item.contains("pseudo_labels_path")) e.pseudo_labels_path = resolve(item["pseudo_labels_path"]);
    if (!e.labels_path && !m.labels_path)
      throw Error(ErrorKind::BadManifest, "model '" + e.name + "' has no labels_path");
    m.models.push_back(std::move(e));
  }
  return m;
}

ZooManifest read_manifest(const fs::path& path) {
  return parse_manifest(read_file(path), path.parent_path());
}

std::string format_manifest(const ZooManifest& manifest) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["task_kind"] =
      manifest.task_kind == LabelKind::Classification ? "classification" : "regression";
  if (manifest.labels_path) doc["labels_path"] = manifest.labels_path->generic_string();
  if (manifest.accuracy_path) doc["accuracy_path"] = manifest.accuracy_path->generic_string();
  doc["models"] = ordered_json::array();
  for (const auto& e : manifest.models) {
    ordered_json item;
    item["name"] = e.name;
    item["features_path"] = e.features_path.generic_string();
    if (e.labels_path) item["labels_path"] = e.labels_path->generic_string();
    if (e.pseudo_labels_path) item["pseudo_labels_path"] = e.pseudo_labels_path->generic_string();
    doc["models"].push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

std::vector<std::pair<std::string, double>> parse_accuracies(std::string_view text) {
  std::vector<std::pair<std::string, double>> out;
  std::set<std::string> names;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto fields = split_commas(lines[i]);
    if (fields.size() != 2)
      throw Error(ErrorKind::RaggedCsv, "accuracy line " + std::to_string(i + 1) +
                                            " must be 'name,accuracy'");
    const auto value = parse_double(fields[1]);
    if (!value) {
      if (out.empty() && i == 0) continue;  // header
      throw Error(ErrorKind::RaggedCsv, "accuracy line " + std::to_string(i + 1) +
                                            " has a non-numeric accuracy");
    }
    if (!std::isfinite(*value))
      throw Error(ErrorKind::NonFiniteValue, "accuracy line " + std::to_string(i + 1));
    std::string name(trim(fields[0]));
    if (!names.insert(name).second)
      throw Error(ErrorKind::RaggedCsv, "duplicate accuracy entry '" + name + "'");
    out.emplace_back(std::move(name), *value);
  }
  if (out.empty()) throw Error(ErrorKind::EmptyFile, "accuracy file has no entries");
  return out;
}

std::vector<std::pair<std::string, double>> read_accuracies(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_accuracies(text);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

}  // namespace transrate
