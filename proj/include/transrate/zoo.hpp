#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "transrate/baselines.hpp"
#include "transrate/rankeval.hpp"
#include "transrate/transrate.hpp"
#include "transrate/zoo_io.hpp"

namespace transrate {

enum class Method { TransRate, Leep, Nce, HScore, LogME, Lfc };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view name);
/// A single method name, or "all" for every method in declaration order.
std::vector<Method> parse_methods(std::string_view name);
bool needs_pseudo_labels(Method m) noexcept;

/// TRANSRATE_THREADS when set to a positive integer, else `fallback`.
int threads_from_env(int fallback = 1);

struct ModelInputs {
  std::string name;
  FeatureMatrix features;
  LabelVector labels;
  std::optional<PseudoLabelMatrix> pseudo_labels;
};

ModelInputs load_model(const ZooManifest& manifest, const ModelEntry& entry);

/// Scores one model under each method. Methods that need pseudo labels are
/// skipped (with a warning) when `skip_unavailable` is set and none were
/// supplied; otherwise that is an InvalidArgument error. Regression labels
/// are binned for the class-based baselines.
std::vector<TransferScore> score_model(const ModelInputs& model, std::span<const Method> methods,
                                       const ScoreConfig& cfg, int threads,
                                       bool skip_unavailable);

struct ZooScores {
  std::vector<std::string> models;              // manifest order
  std::vector<std::vector<TransferScore>> scores;  // per model, method order
};

/// Loads and scores every model of the manifest. Models are processed in
/// parallel; results are assembled in manifest order.
ZooScores score_zoo(const ZooManifest& manifest, std::span<const Method> methods,
                    const ScoreConfig& cfg, int threads);

/// One ranking per method present in the scores.
std::vector<Ranking> rank_zoo(const ZooScores& zoo);

/// Pearson / tau / weighted tau per method over the models that have an
/// accuracy entry.
std::vector<CorrelationReport> evaluate_zoo(
    const ZooScores& zoo, std::span<const std::pair<std::string, double>> accuracies);

}  // namespace transrate
