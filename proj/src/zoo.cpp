#include "transrate/zoo.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <map>

#include "transrate/errors.hpp"
#include "transrate/parallel.hpp"

namespace transrate {

namespace {

constexpr Method kAllMethods[] = {Method::TransRate, Method::Leep,  Method::Nce,
                                  Method::HScore,    Method::LogME, Method::Lfc};

const LabelVector& class_labels(const LabelVector& labels, const ScoreConfig& cfg,
                                std::optional<LabelVector>& storage) {
  if (labels.kind() == LabelKind::Classification) return labels;
  storage.emplace(bin_regression_labels(labels, cfg.regression_bins));
  return *storage;
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::TransRate: return "transrate";
    case Method::Leep: return "leep";
    case Method::Nce: return "nce";
    case Method::HScore: return "hscore";
    case Method::LogME: return "logme";
    case Method::Lfc: return "lfc";
  }
  return "transrate";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods)
    if (to_string(m) == name) return m;
  throw Error(ErrorKind::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

std::vector<Method> parse_methods(std::string_view name) {
  if (name == "all") return {std::begin(kAllMethods), std::end(kAllMethods)};
  return {parse_method(name)};
}

bool needs_pseudo_labels(Method m) noexcept { return m == Method::Leep || m == Method::Nce; }

int threads_from_env(int fallback) {
  const char* env = std::getenv("TRANSRATE_THREADS");
  if (!env) return fallback;
  int value = 0;
  const std::string_view s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value < 1) return fallback;
  return value;
}

ModelInputs load_model(const ZooManifest& manifest, const ModelEntry& entry) {
  ModelInputs in{entry.name, read_feature_file(entry.features_path),
                 read_labels(manifest.labels_for(entry), manifest.task_kind), std::nullopt};
  if (entry.pseudo_labels_path) in.pseudo_labels.emplace(read_matrix_file(*entry.pseudo_labels_path));
  return in;
}

std::vector<TransferScore> score_model(const ModelInputs& model, std::span<const Method> methods,
                                       const ScoreConfig& cfg, int threads,
                                       bool skip_unavailable) {
  cfg.validate();
  const std::string fingerprint = cfg.fingerprint();
  const auto n = static_cast<std::size_t>(model.features.rows());
  const auto d = static_cast<std::size_t>(model.features.cols());

  std::optional<LabelVector> binned;
  std::vector<TransferScore> out;
  for (Method m : methods) {
    if (needs_pseudo_labels(m) && !model.pseudo_labels) {
      if (skip_unavailable) {
        warn("model '" + model.name + "': no pseudo labels, skipping " + std::string(to_string(m)));
        continue;
      }
      throw Error(ErrorKind::InvalidArgument,
                  std::string(to_string(m)) + " needs pseudo labels (source-classifier outputs)");
    }

    if (m == Method::TransRate) {
      auto s = transrate_score(model.features, model.labels, cfg, model.name, threads);
      out.push_back(std::move(s));
      continue;
    }

    double value = 0.0;
    std::size_t classes = 0;
    if (m == Method::LogME) {
      const auto r = logme_score(model.features, model.labels);
      if (!r.converged) warn("model '" + model.name + "': LogME did not converge");
      value = r.value;
      classes = static_cast<std::size_t>(model.labels.num_classes());
    } else {
      const LabelVector& y = class_labels(model.labels, cfg, binned);
      classes = static_cast<std::size_t>(y.num_classes());
      switch (m) {
        case Method::Leep: value = leep_score(*model.pseudo_labels, y); break;
        case Method::Nce: value = nce_score(*model.pseudo_labels, y); break;
        case Method::HScore: value = hscore(model.features, y); break;
        case Method::Lfc: value = lfc_score(model.features, y); break;
        default: break;
      }
    }
    out.push_back(TransferScore{model.name, std::string(to_string(m)), value, fingerprint, n, d,
                                classes});
  }
  return out;
}

ZooScores score_zoo(const ZooManifest& manifest, std::span<const Method> methods,
                    const ScoreConfig& cfg, int threads) {
  ZooScores zoo;
  zoo.scores.resize(manifest.models.size());
  for (const auto& e : manifest.models) zoo.models.push_back(e.name);

  // With several models, parallelize across models and keep each model
  // single-threaded; a lone model gets the threads internally.
  const int inner = manifest.models.size() == 1 ? threads : 1;
  parallel_for(manifest.models.size(), threads, [&](std::size_t i) {
    const auto inputs = load_model(manifest, manifest.models[i]);
    zoo.scores[i] = score_model(inputs, methods, cfg, inner, /*skip_unavailable=*/true);
  });
  return zoo;
}

std::vector<Ranking> rank_zoo(const ZooScores& zoo) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<TransferScore>> by_method;
  for (const auto& model_scores : zoo.scores)
    for (const auto& s : model_scores) {
      if (!by_method.contains(s.method)) order.push_back(s.method);
      by_method[s.method].push_back(s);
    }
  std::vector<Ranking> out;
  for (const auto& method : order) out.push_back(rank_models(by_method[method]));
  return out;
}

std::vector<CorrelationReport> evaluate_zoo(
    const ZooScores& zoo, std::span<const std::pair<std::string, double>> accuracies) {
  std::map<std::string, double> acc(accuracies.begin(), accuracies.end());
  for (const auto& [name, value] : accuracies)
    if (std::find(zoo.models.begin(), zoo.models.end(), name) == zoo.models.end())
      throw Error(ErrorKind::BadManifest, "accuracy entry '" + name + "' names no model");
  std::vector<std::string> order;
  std::map<std::string, std::vector<ScoreAccuracy>> by_method;
  for (const auto& model_scores : zoo.scores)
    for (const auto& s : model_scores) {
      const auto it = acc.find(s.model_name);
      if (it == acc.end()) continue;
      if (!by_method.contains(s.method)) order.push_back(s.method);
      by_method[s.method].push_back(ScoreAccuracy{s.model_name, s.value, it->second});
    }
  if (order.empty())
    throw Error(ErrorKind::InvalidArgument, "no scored model has an accuracy entry");
  std::vector<CorrelationReport> out;
  for (const auto& method : order) out.push_back(evaluate_correlations(method, by_method[method]));
  return out;
}

}  // namespace transrate
