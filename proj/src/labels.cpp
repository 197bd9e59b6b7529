#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "transrate/errors.hpp"
#include "transrate/transrate.hpp"

namespace transrate {

LabelVector LabelVector::classification(std::vector<std::int32_t> ids,
                                        std::optional<int> num_classes) {
  if (ids.empty()) throw Error(ErrorKind::EmptyFile, "label vector is empty");
  std::int32_t max_id = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0)
      throw Error(ErrorKind::InvalidArgument,
                  "negative class id at position " + std::to_string(i));
    max_id = std::max(max_id, ids[i]);
  }
  const int inferred = static_cast<int>(max_id) + 1;
  if (num_classes && *num_classes < inferred)
    throw Error(ErrorKind::InvalidArgument, "class id exceeds the declared class count");

  LabelVector out;
  out.kind_ = LabelKind::Classification;
  out.num_classes_ = num_classes.value_or(inferred);
  out.ids_ = std::move(ids);
  return out;
}

LabelVector LabelVector::regression(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyFile, "label vector is empty");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw Error(ErrorKind::NonFiniteValue,
                  "regression target at position " + std::to_string(i) + " is not finite");
  LabelVector out;
  out.kind_ = LabelKind::Regression;
  out.values_ = std::move(values);
  return out;
}

std::vector<std::size_t> LabelVector::class_counts() const {
  if (kind_ != LabelKind::Classification)
    throw Error(ErrorKind::InvalidArgument, "class counts need classification labels");
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
  for (auto id : ids_) ++counts[static_cast<std::size_t>(id)];
  return counts;
}

std::vector<std::vector<Index>> LabelVector::class_members() const {
  if (kind_ != LabelKind::Classification)
    throw Error(ErrorKind::InvalidArgument, "class members need classification labels");
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(num_classes_));
  for (std::size_t i = 0; i < ids_.size(); ++i)
    members[static_cast<std::size_t>(ids_[i])].push_back(static_cast<Index>(i));
  return members;
}

LabelVector bin_regression_labels(const LabelVector& labels, int bins) {
  if (labels.kind() != LabelKind::Regression)
    throw Error(ErrorKind::InvalidArgument, "binning needs regression labels");
  if (bins < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 bins");
  const auto values = labels.values();
  const std::size_t n = values.size();
  const auto nbins = static_cast<std::size_t>(bins);
  if (n < nbins)
    throw Error(ErrorKind::TooFewSamples, std::to_string(n) + " targets cannot fill " +
                                              std::to_string(bins) + " bins");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  const std::size_t base = n / nbins;
  const std::size_t extra = n % nbins;
  std::vector<std::int32_t> ids(n);
  std::size_t pos = 0;
  for (std::size_t b = 0; b < nbins; ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k) ids[order[pos++]] = static_cast<std::int32_t>(b);
  }
  return LabelVector::classification(std::move(ids), bins);
}

double label_entropy(const LabelVector& labels) {
  auto counts = labels.class_counts();
  // Sorted so the sum does not depend on how classes are numbered.
  std::sort(counts.begin(), counts.end());
  const double n = static_cast<double>(labels.size());
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace transrate
