#include "transrate/rankeval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>

#include "transrate/errors.hpp"

namespace transrate {

namespace {

void check_lists(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(ErrorKind::InvalidArgument, "correlation inputs differ in length");
  if (x.size() < 2) throw Error(ErrorKind::InvalidArgument, "correlation needs at least 2 entries");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw Error(ErrorKind::NonFiniteValue, "correlation input " + std::to_string(i) +
                                                 " is not finite");
}

std::int64_t tied_pairs(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::int64_t ties = 0;
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    ties += t * (t - 1) / 2;
    i = j;
  }
  return ties;
}

// Counts strict inversions of v while merge-sorting it.
std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& scratch,
                              std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = count_inversions(v, scratch, lo, mid) + count_inversions(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<std::int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

// Dense 0-based ranks of values (equal values share a rank).
std::vector<std::size_t> dense_ranks(std::span<const double> values, std::size_t& distinct) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  distinct = sorted.size();
  std::vector<std::size_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), values[i]) - sorted.begin());
  return out;
}

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
  void add(std::size_t i) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  // Number of inserted ranks < i.
  std::int64_t below(std::size_t i) const {
    std::int64_t s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<std::int64_t> tree_;
};

struct PairCoefficients {
  std::vector<std::int64_t> signed_pairs;  // concordant - discordant, per item
  std::vector<std::int64_t> untied_x;
  std::vector<std::int64_t> untied_y;
};

PairCoefficients pair_coefficients(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::size_t levels_x = 0, levels_y = 0;
  const auto rx = dense_ranks(x, levels_x);
  const auto ry = dense_ranks(y, levels_y);

  std::vector<std::int64_t> group_x(levels_x, 0), group_y(levels_y, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++group_x[rx[i]];
    ++group_y[ry[i]];
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rx[a] < rx[b]; });

  PairCoefficients pc;
  pc.signed_pairs.assign(n, 0);
  pc.untied_x.resize(n);
  pc.untied_y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pc.untied_x[i] = static_cast<std::int64_t>(n) - group_x[rx[i]];
    pc.untied_y[i] = static_cast<std::int64_t>(n) - group_y[ry[i]];
  }

  // Items with smaller x: concordant when their y is smaller, discordant when larger.
  {
    Fenwick seen(levels_y);
    std::int64_t inserted = 0;
    for (std::size_t g = 0; g < n;) {
      std::size_t h = g;
      while (h < n && rx[order[h]] == rx[order[g]]) ++h;
      for (std::size_t k = g; k < h; ++k) {
        const std::size_t i = order[k];
        const std::int64_t lower = seen.below(ry[i]);
        const std::int64_t higher = inserted - seen.below(ry[i] + 1);
        pc.signed_pairs[i] += lower - higher;
      }
      for (std::size_t k = g; k < h; ++k) seen.add(ry[order[k]]);
      inserted += static_cast<std::int64_t>(h - g);
      g = h;
    }
  }
  // Items with larger x: concordant when their y is larger.
  {
    Fenwick seen(levels_y);
    std::int64_t inserted = 0;
    for (std::size_t g = n; g > 0;) {
      std::size_t h = g;
      while (h > 0 && rx[order[h - 1]] == rx[order[g - 1]]) --h;
      for (std::size_t k = h; k < g; ++k) {
        const std::size_t i = order[k];
        const std::int64_t lower = seen.below(ry[i]);
        const std::int64_t higher = inserted - seen.below(ry[i] + 1);
        pc.signed_pairs[i] += higher - lower;
      }
      for (std::size_t k = h; k < g; ++k) seen.add(ry[order[k]]);
      inserted += static_cast<std::int64_t>(g - h);
      g = h;
    }
  }
  return pc;
}

// Rank order by (primary desc, secondary desc, index asc).
std::vector<std::size_t> rank_order(std::span<const double> primary,
                                    std::span<const double> secondary) {
  std::vector<std::size_t> order(primary.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (primary[a] != primary[b]) return primary[a] > primary[b];
    return secondary[a] > secondary[b];
  });
  return order;
}

double weighted_tau_one_side(const PairCoefficients& pc, const std::vector<std::size_t>& order) {
  double num = 0.0, den_x = 0.0, den_y = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const double w = 1.0 / (static_cast<double>(r) + 1.0);
    const std::size_t i = order[r];
    num += static_cast<double>(pc.signed_pairs[i]) * w;
    den_x += static_cast<double>(pc.untied_x[i]) * w;
    den_y += static_cast<double>(pc.untied_y[i]) * w;
  }
  if (den_x == 0.0 || den_y == 0.0)
    throw Error(ErrorKind::AllTied, "weighted tau: every pair is tied on one side");
  return num / std::sqrt(den_x * den_y);
}

std::vector<double> scores_of(std::span<const ScoreAccuracy> pairs) {
  std::vector<double> v;
  v.reserve(pairs.size());
  for (const auto& p : pairs) v.push_back(p.score);
  return v;
}

std::vector<double> accuracies_of(std::span<const ScoreAccuracy> pairs) {
  std::vector<double> v;
  v.reserve(pairs.size());
  for (const auto& p : pairs) v.push_back(p.accuracy);
  return v;
}

}  // namespace

void validate_pairs(std::span<const ScoreAccuracy> pairs) {
  if (pairs.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 score/accuracy pairs");
  std::set<std::string> names;
  for (const auto& p : pairs) {
    if (!std::isfinite(p.score) || !std::isfinite(p.accuracy))
      throw Error(ErrorKind::NonFiniteValue, "non-finite score or accuracy for '" + p.model_name + "'");
    if (!names.insert(p.model_name).second)
      throw Error(ErrorKind::InvalidArgument, "duplicate model name '" + p.model_name + "'");
  }
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_lists(x, y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::ZeroVariance, "Pearson: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  check_lists(x, y);
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  std::int64_t joint_ties = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && x[order[j]] == x[order[i]] && y[order[j]] == y[order[i]]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    joint_ties += t * (t - 1) / 2;
    i = j;
  }

  std::vector<double> ys(n), scratch(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::int64_t swaps = count_inversions(ys, scratch, 0, n);

  const auto total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t ties_x = tied_pairs({x.begin(), x.end()});
  const std::int64_t ties_y = tied_pairs({y.begin(), y.end()});
  const std::int64_t net = total - ties_x - ties_y + joint_ties - 2 * swaps;
  const std::int64_t untied_x = total - ties_x, untied_y = total - ties_y;
  if (untied_x == 0 || untied_y == 0)
    throw Error(ErrorKind::AllTied, "Kendall tau: every pair is tied on one side");
  return static_cast<double>(net) /
         std::sqrt(static_cast<double>(untied_x) * static_cast<double>(untied_y));
}

double weighted_tau(std::span<const double> x, std::span<const double> y) {
  check_lists(x, y);
  const auto pc = pair_coefficients(x, y);
  const double by_y = weighted_tau_one_side(pc, rank_order(y, x));
  const double by_x = weighted_tau_one_side(pc, rank_order(x, y));
  return (by_y + by_x) / 2.0;
}

double pearson(std::span<const ScoreAccuracy> pairs) {
  validate_pairs(pairs);
  return pearson(scores_of(pairs), accuracies_of(pairs));
}

double kendall_tau(std::span<const ScoreAccuracy> pairs) {
  validate_pairs(pairs);
  return kendall_tau(scores_of(pairs), accuracies_of(pairs));
}

double weighted_tau(std::span<const ScoreAccuracy> pairs) {
  validate_pairs(pairs);
  return weighted_tau(scores_of(pairs), accuracies_of(pairs));
}

CorrelationReport evaluate_correlations(std::string method, std::span<const ScoreAccuracy> pairs) {
  validate_pairs(pairs);
  const auto s = scores_of(pairs);
  const auto a = accuracies_of(pairs);
  return CorrelationReport{std::move(method), pairs.size(), pearson(s, a), kendall_tau(s, a),
                           weighted_tau(s, a)};
}

Ranking rank_models(std::span<const TransferScore> scores) {
  if (scores.empty()) throw Error(ErrorKind::InvalidArgument, "nothing to rank");
  Ranking out;
  out.method = scores.front().method;
  out.config_fingerprint = scores.front().config_fingerprint;
  for (const auto& s : scores)
    if (s.method != out.method || s.config_fingerprint != out.config_fingerprint)
      throw Error(ErrorKind::MixedConfig, "cannot rank scores from different methods or configs");

  std::vector<const TransferScore*> sorted;
  for (const auto& s : scores) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(), [](const TransferScore* a, const TransferScore* b) {
    if (a->value != b->value) return a->value > b->value;
    return a->model_name < b->model_name;
  });
  for (std::size_t i = 0; i < sorted.size(); ++i)
    out.entries.push_back(RankedModel{i + 1, sorted[i]->model_name, sorted[i]->value});
  return out;
}

}  // namespace transrate
