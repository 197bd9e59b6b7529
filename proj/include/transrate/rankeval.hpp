#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "transrate/transrate.hpp"

namespace transrate {

struct ScoreAccuracy {
  std::string model_name;
  double score = 0.0;
  double accuracy = 0.0;
};

/// Checks the pair list: at least two entries, finite values, unique names.
void validate_pairs(std::span<const ScoreAccuracy> pairs);

/// Product-moment correlation. Throws ZeroVariance if either side is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// Kendall tau-b, O(n log n). Throws AllTied when either side has no untied pair.
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// Hyperbolically weighted tau: an item at rank r weighs 1 / (r + 1), a pair
/// weighs the sum of its items. Ranks are taken by y descending (ties by x
/// descending, then input order) and by x descending (ties by y); the result
/// averages the two. Ties are corrected as in tau-b.
double weighted_tau(std::span<const double> x, std::span<const double> y);

double pearson(std::span<const ScoreAccuracy> pairs);
double kendall_tau(std::span<const ScoreAccuracy> pairs);
double weighted_tau(std::span<const ScoreAccuracy> pairs);

struct CorrelationReport {
  std::string method;
  std::size_t count = 0;
  double pearson = 0.0;
  double kendall_tau = 0.0;
  double weighted_tau = 0.0;
};

CorrelationReport evaluate_correlations(std::string method, std::span<const ScoreAccuracy> pairs);

struct RankedModel {
  std::size_t rank = 0;  // 1-based
  std::string model_name;
  double score = 0.0;
};

struct Ranking {
  std::string method;
  std::string config_fingerprint;
  std::vector<RankedModel> entries;
};

/// Orders scores descending, ties by model name ascending. All scores must
/// share one method and config fingerprint (MixedConfig otherwise).
Ranking rank_models(std::span<const TransferScore> scores);

}  // namespace transrate
