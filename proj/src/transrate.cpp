#include "transrate/transrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "transrate/errors.hpp"
#include "transrate/parallel.hpp"

namespace transrate {

namespace {

void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw Error(ErrorKind::InvalidArgument, "eps must be positive and finite");
}

// Sums in ascending order of value so the result does not depend on class
// numbering.
double canonical_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string_view to_string(ClassWeighting w) noexcept {
  switch (w) {
    case ClassWeighting::Empirical: return "empirical";
    case ClassWeighting::Uniform: return "uniform";
    case ClassWeighting::RawSum: return "rawsum";
  }
  return "empirical";
}

ClassWeighting parse_class_weighting(std::string_view name) {
  if (name == "empirical") return ClassWeighting::Empirical;
  if (name == "uniform") return ClassWeighting::Uniform;
  if (name == "rawsum") return ClassWeighting::RawSum;
  throw Error(ErrorKind::InvalidArgument, "unknown class weighting '" + std::string(name) + "'");
}

void ScoreConfig::validate() const {
  check_eps(eps);
  if (regression_bins < 2) throw Error(ErrorKind::InvalidArgument, "regression_bins must be >= 2");
}

std::string ScoreConfig::fingerprint() const {
  char canonical[256];
  std::snprintf(canonical, sizeof canonical,
                "eps=%.17g;unit_norm=%d;per_dim=%d;weighting=%s;subtract_h=%d;bins=%d", eps,
                unit_norm ? 1 : 0, per_dim ? 1 : 0, std::string(to_string(class_weighting)).c_str(),
                subtract_label_entropy ? 1 : 0, regression_bins);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  return hex;
}

double coding_rate(const FeatureMatrix& features, double eps, int threads) {
  check_eps(eps);
  const double n = static_cast<double>(features.rows());
  const double alpha = 1.0 / (n * eps);
  return 0.5 * logdet_ipd(gram(features, SidePolicy::Auto, threads), alpha);
}

double conditional_coding_rate(const FeatureMatrix& features, const LabelVector& labels,
                               double eps, ClassWeighting weighting, int threads) {
  check_eps(eps);
  if (labels.kind() != LabelKind::Classification)
    throw Error(ErrorKind::InvalidArgument,
                "conditional coding rate needs class labels; bin regression targets first");
  if (labels.size() != static_cast<std::size_t>(features.rows()))
    throw Error(ErrorKind::InvalidArgument, "label count does not match feature rows");

  const auto members = labels.class_members();
  for (std::size_t c = 0; c < members.size(); ++c)
    if (members[c].empty())
      throw Error(ErrorKind::EmptyClass, "class " + std::to_string(c) + " has no samples");

  std::vector<double> rates(members.size());
  parallel_for(members.size(), threads, [&](std::size_t c) {
    rates[c] = coding_rate(features.select_rows(members[c]), eps, 1);
  });

  const double n = static_cast<double>(features.rows());
  const double num_classes = static_cast<double>(members.size());
  switch (weighting) {
    case ClassWeighting::Empirical: {
      std::vector<double> terms(rates.size());
      for (std::size_t c = 0; c < rates.size(); ++c)
        terms[c] = static_cast<double>(members[c].size()) / n * rates[c];
      return canonical_sum(std::move(terms));
    }
    case ClassWeighting::Uniform:
      return canonical_sum(std::move(rates)) / num_classes;
    case ClassWeighting::RawSum:
      return canonical_sum(std::move(rates));
  }
  return 0.0;
}

TransRateTerms transrate_terms(const FeatureMatrix& features, const LabelVector& labels,
                               const ScoreConfig& cfg, int threads) {
  cfg.validate();
  if (labels.size() != static_cast<std::size_t>(features.rows()))
    throw Error(ErrorKind::InvalidArgument, "label count (" + std::to_string(labels.size()) +
                                                ") does not match feature rows (" +
                                                std::to_string(features.rows()) + ")");

  const LabelVector classes = labels.kind() == LabelKind::Regression
                                  ? bin_regression_labels(labels, cfg.regression_bins)
                                  : labels;
  if (classes.num_classes() < 2)
    throw Error(ErrorKind::DegenerateLabels, "TransRate needs at least two classes");

  TransRateTerms t;
  t.n = static_cast<std::size_t>(features.rows());
  t.d = static_cast<std::size_t>(features.cols());
  t.num_classes = static_cast<std::size_t>(classes.num_classes());

  std::optional<NormalizedFeatures> normalized;
  if (cfg.unit_norm) {
    normalized.emplace(unit_normalize_rows(features));
    t.zero_rows = normalized->zero_rows;
  }
  const FeatureMatrix& z = normalized ? normalized->features : features;

  t.conditional_coding_rate =
      conditional_coding_rate(z, classes, cfg.eps, cfg.class_weighting, threads);
  t.coding_rate = coding_rate(z, cfg.eps, threads);
  t.raw = t.coding_rate - t.conditional_coding_rate;
  t.label_entropy = label_entropy(classes);

  double value = t.raw;
  if (cfg.subtract_label_entropy) value -= t.label_entropy;
  if (cfg.per_dim) value /= static_cast<double>(t.d);
  if (!std::isfinite(value)) throw Error(ErrorKind::NumericFailure, "TransRate is not finite");
  t.value = value;
  return t;
}

TransferScore transrate_score(const FeatureMatrix& features, const LabelVector& labels,
                              const ScoreConfig& cfg, std::string model_name, int threads) {
  const auto t = transrate_terms(features, labels, cfg, threads);
  return TransferScore{std::move(model_name), "transrate", t.value, cfg.fingerprint(),
                       t.n, t.d, t.num_classes};
}

}  // namespace transrate
