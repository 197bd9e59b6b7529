#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace transrate {

/// Row-major storage: one row per sample, one column per feature dimension.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

struct NormalizedFeatures;

/// An n x d matrix of target-sample features produced by one candidate
/// model/layer. Construction rejects empty shapes and non-finite entries.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(Matrix data);

  Index rows() const noexcept { return data_.rows(); }
  Index cols() const noexcept { return data_.cols(); }
  const Matrix& data() const noexcept { return data_; }

  /// True when produced by unit_normalize_rows.
  bool unit_normalized() const noexcept { return unit_normalized_; }

  /// Copies the listed rows, in the listed order.
  FeatureMatrix select_rows(std::span<const Index> rows) const;

 private:
  friend NormalizedFeatures unit_normalize_rows(const FeatureMatrix&);
  FeatureMatrix(Matrix data, bool unit_normalized)
      : data_(std::move(data)), unit_normalized_(unit_normalized) {}

  Matrix data_;
  bool unit_normalized_ = false;
};

struct NormalizedFeatures {
  FeatureMatrix features;
  std::size_t zero_rows = 0;
};

/// Scales every nonzero row to unit L2 norm. Zero rows are left as they are
/// and counted; a warning is emitted when any are found.
NormalizedFeatures unit_normalize_rows(const FeatureMatrix& features);

enum class GramOrientation {
  FeatureSide,  // d x d, Z^T Z
  SampleSide,   // n x n, Z Z^T
};

enum class SidePolicy { Auto, ForceFeature, ForceSample };

struct GramSide {
  GramOrientation side;
  Eigen::MatrixXd matrix;
};

/// Gram matrix of the features. Auto picks the smaller of d and n and uses
/// the feature side on ties. The output is tiled on a grid that depends only
/// on the matrix shape, so the bytes are identical for any thread count.
GramSide gram(const FeatureMatrix& features, SidePolicy policy = SidePolicy::Auto,
              int threads = 1);

/// logdet(I + alpha * G) in nats via Cholesky; falls back to summing
/// log(1 + alpha * lambda_i) over eigenvalues if the factorization fails.
double logdet_ipd(const Eigen::MatrixXd& gram_matrix, double alpha);
inline double logdet_ipd(const GramSide& g, double alpha) { return logdet_ipd(g.matrix, alpha); }

/// min(n, d) singular values in descending order; values below the
/// numerical rank threshold are reported as exact zeros.
std::vector<double> singular_values(const FeatureMatrix& features);

}  // namespace transrate
