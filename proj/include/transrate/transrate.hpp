#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "transrate/matcore.hpp"

namespace transrate {

enum class LabelKind { Classification, Regression };

/// Target labels: class ids in [0, C) for classification, finite reals for
/// regression.
class LabelVector {
 public:
  /// C defaults to max(id) + 1 so ids stay stable across label files.
  static LabelVector classification(std::vector<std::int32_t> ids,
                                    std::optional<int> num_classes = std::nullopt);
  static LabelVector regression(std::vector<double> values);

  LabelKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept {
    return kind_ == LabelKind::Classification ? ids_.size() : values_.size();
  }
  /// 0 for regression labels.
  int num_classes() const noexcept { return num_classes_; }

  std::span<const std::int32_t> class_ids() const noexcept { return ids_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Samples per class, indexed by class id. Classification only.
  std::vector<std::size_t> class_counts() const;

  /// Row indices of each class, ascending. Classification only.
  std::vector<std::vector<Index>> class_members() const;

 private:
  LabelVector() = default;

  LabelKind kind_ = LabelKind::Classification;
  int num_classes_ = 0;
  std::vector<std::int32_t> ids_;
  std::vector<double> values_;
};

enum class ClassWeighting {
  Empirical,  // n_c / n
  Uniform,    // 1 / C, matches the published reference implementation
  RawSum,     // unweighted sum over classes
};

std::string_view to_string(ClassWeighting w) noexcept;
ClassWeighting parse_class_weighting(std::string_view name);

struct ScoreConfig {
  /// Distortion: the value in the 1 / (n * eps) scale factor.
  double eps = 1e-4;
  bool unit_norm = true;
  /// Divide the final score by the feature dimension d.
  bool per_dim = true;
  ClassWeighting class_weighting = ClassWeighting::Empirical;
  bool subtract_label_entropy = false;
  /// Equal-count bins used to turn regression targets into classes.
  int regression_bins = 10;

  void validate() const;

  /// 16 hex digits identifying every field above.
  std::string fingerprint() const;
};

struct TransferScore {
  std::string model_name;
  std::string method;
  double value = 0.0;
  std::string config_fingerprint;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t num_classes = 0;
};

/// R(Z, eps) = 1/2 logdet(I + Gram / (n * eps)), in nats.
double coding_rate(const FeatureMatrix& features, double eps, int threads = 1);

/// Class-weighted sum of per-class coding rates, each class using its own
/// 1 / (n_c * eps) factor.
double conditional_coding_rate(const FeatureMatrix& features, const LabelVector& labels,
                               double eps, ClassWeighting weighting, int threads = 1);

/// Intermediate quantities of one TransRate evaluation.
struct TransRateTerms {
  double coding_rate = 0.0;
  double conditional_coding_rate = 0.0;
  double raw = 0.0;  // coding_rate - conditional_coding_rate
  double label_entropy = 0.0;
  double value = 0.0;  // after optional H(Y) subtraction and division by d
  std::size_t zero_rows = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t num_classes = 0;
};

TransRateTerms transrate_terms(const FeatureMatrix& features, const LabelVector& labels,
                               const ScoreConfig& cfg = {}, int threads = 1);

TransferScore transrate_score(const FeatureMatrix& features, const LabelVector& labels,
                              const ScoreConfig& cfg = {}, std::string model_name = {},
                              int threads = 1);

/// Ranks targets ascending (ties by index) and cuts them into `bins`
/// contiguous groups; the first n mod bins groups get one extra member.
LabelVector bin_regression_labels(const LabelVector& labels, int bins);

/// Empirical label entropy in nats.
double label_entropy(const LabelVector& labels);

}  // namespace transrate
