#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "transrate/matcore.hpp"
#include "transrate/transrate.hpp"

namespace transrate {

/// Counter-based generator: output k of a stream is the SplitMix64 finalizer
/// applied to seed + (k + 1) * 0x9E3779B97F4A7C15. Normals come from the
/// Box-Muller transform, both outputs used in turn.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() noexcept;
  /// Uniform in the open interval (0, 1), 53 random bits.
  double uniform() noexcept;
  double normal() noexcept;
  /// Uniform integer in [0, bound), bound > 0 (Lemire's rejection method).
  std::uint64_t below(std::uint64_t bound) noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct BlobSpec {
  /// One mean vector per class; all of the same dimension.
  std::vector<std::vector<double>> means;
  double stddev = 1.0;
  std::size_t per_class = 100;
  std::uint64_t seed = 0;

  std::size_t classes() const noexcept { return means.size(); }
  std::size_t dims() const noexcept { return means.empty() ? 0 : means.front().size(); }
};

struct Dataset {
  FeatureMatrix features;
  LabelVector labels;
};

/// Isotropic Gaussian blobs. Samples are drawn class by class (row-major),
/// then rows are shuffled by a Fisher-Yates pass on the same stream.
Dataset gen_blobs(const BlobSpec& spec);

struct SweepLevel {
  double factor = 0.0;  // scale applied to the offsets of the means from their centroid
  Dataset data;
};

/// `levels` datasets whose class means are the base means pulled towards
/// their centroid by factors 0, 1/(k-1), ..., 1. The seed is shared, so only
/// the separation changes between levels.
std::vector<SweepLevel> separability_sweep(std::size_t levels, const BlobSpec& base);

/// Plug-in mutual information I(Z; Y) in nats from an equal-width histogram
/// of Z (d <= 3) with `bins_per_dim` bins per axis spanning [min, max].
double histogram_mi(const FeatureMatrix& features, const LabelVector& labels, int bins_per_dim);

/// Literal O(n^2) definitions of the rank metrics, kept apart from the fast
/// implementations they check.
namespace bruteforce {

double pearson(std::span<const double> x, std::span<const double> y);
double kendall_tau(std::span<const double> x, std::span<const double> y);
double weighted_tau(std::span<const double> x, std::span<const double> y);

/// Pair-by-pair weighted sum without regrouping by item; agrees with
/// weighted_tau up to floating-point reassociation.
double weighted_tau_pairwise(std::span<const double> x, std::span<const double> y);

}  // namespace bruteforce

}  // namespace transrate
