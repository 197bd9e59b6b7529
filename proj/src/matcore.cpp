#include "transrate/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "transrate/errors.hpp"
#include "transrate/parallel.hpp"

namespace transrate {

namespace {

// Gram tiles are kTile x kTile blocks of the output. The grid depends only on
// the output size, never on the number of workers.
constexpr Index kTile = 128;

void check_finite(const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (!std::isfinite(m(i, j)))
        throw Error(ErrorKind::NonFiniteValue,
                    "feature entry (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") is not finite");
}

}  // namespace

FeatureMatrix::FeatureMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1)
    throw Error(ErrorKind::InvalidArgument, "feature matrix must have n >= 1 and d >= 1");
  check_finite(data_);
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const Index> rows) const {
  if (rows.empty()) throw Error(ErrorKind::InvalidArgument, "select_rows: empty row set");
  Matrix out(static_cast<Index>(rows.size()), data_.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Index r = rows[k];
    if (r < 0 || r >= data_.rows())
      throw Error(ErrorKind::InvalidArgument, "select_rows: row index out of range");
    out.row(static_cast<Index>(k)) = data_.row(r);
  }
  return FeatureMatrix(std::move(out), unit_normalized_);
}

NormalizedFeatures unit_normalize_rows(const FeatureMatrix& features) {
  Matrix out = features.data();
  std::size_t zero_rows = 0;
  for (Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm == 0.0) {
      ++zero_rows;
      continue;
    }
    out.row(i) /= norm;
  }
  if (zero_rows > 0)
    warn(std::to_string(zero_rows) + " all-zero feature row(s) left unnormalized");
  return NormalizedFeatures{FeatureMatrix(std::move(out), true), zero_rows};
}

GramSide gram(const FeatureMatrix& features, SidePolicy policy, int threads) {
  const Matrix& z = features.data();
  const Index n = z.rows();
  const Index d = z.cols();

  GramOrientation side = GramOrientation::FeatureSide;
  if (policy == SidePolicy::ForceSample || (policy == SidePolicy::Auto && n < d))
    side = GramOrientation::SampleSide;

  const Index k = side == GramOrientation::FeatureSide ? d : n;
  const Index tiles = (k + kTile - 1) / kTile;

  std::vector<std::pair<Index, Index>> blocks;
  for (Index bi = 0; bi < tiles; ++bi)
    for (Index bj = bi; bj < tiles; ++bj) blocks.emplace_back(bi, bj);

  Eigen::MatrixXd g(k, k);
  parallel_for(blocks.size(), threads, [&](std::size_t b) {
    const auto [bi, bj] = blocks[b];
    const Index i0 = bi * kTile, j0 = bj * kTile;
    const Index ni = std::min(kTile, k - i0), nj = std::min(kTile, k - j0);
    if (side == GramOrientation::FeatureSide) {
      g.block(i0, j0, ni, nj).noalias() = z.middleCols(i0, ni).transpose() * z.middleCols(j0, nj);
    } else {
      g.block(i0, j0, ni, nj).noalias() = z.middleRows(i0, ni) * z.middleRows(j0, nj).transpose();
    }
  });

  // Mirror the upper triangle so the result is exactly symmetric.
  for (Index j = 0; j < k; ++j)
    for (Index i = j + 1; i < k; ++i) g(i, j) = g(j, i);

  if (!g.allFinite()) throw Error(ErrorKind::NumericOverflow, "Gram accumulation overflowed");
  return GramSide{side, std::move(g)};
}

double logdet_ipd(const Eigen::MatrixXd& gram_matrix, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(ErrorKind::InvalidArgument, "logdet_ipd: alpha must be positive and finite");
  if (gram_matrix.rows() != gram_matrix.cols())
    throw Error(ErrorKind::InvalidArgument, "logdet_ipd: matrix is not square");

  const Index k = gram_matrix.rows();
  Eigen::MatrixXd m = alpha * gram_matrix;
  m.diagonal().array() += 1.0;

  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) {
    const auto& l = llt.matrixLLT();
    double sum = 0.0;
    bool ok = true;
    for (Index i = 0; i < k; ++i) {
      const double lii = l(i, i);
      if (!(lii > 0.0) || !std::isfinite(lii)) {
        ok = false;
        break;
      }
      sum += std::log(lii);
    }
    if (ok) {
      const double result = 2.0 * sum;
      if (!std::isfinite(result))
        throw Error(ErrorKind::NumericFailure, "logdet_ipd: non-finite log-determinant");
      return result;
    }
  }

  warn("Cholesky factorization of I + alpha*G failed; using eigenvalue fallback");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_matrix, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorKind::NumericFailure, "logdet_ipd: eigenvalue fallback did not converge");
  double sum = 0.0;
  for (Index i = 0; i < k; ++i) {
    const double term = std::log1p(alpha * eig.eigenvalues()(i));
    if (!std::isfinite(term))
      throw Error(ErrorKind::NumericFailure,
                  "logdet_ipd: non-finite term at diagonal index " + std::to_string(i));
    sum += term;
  }
  return sum;
}

std::vector<double> singular_values(const FeatureMatrix& features) {
  const Matrix& z = features.data();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(z);
  if (svd.info() != Eigen::Success)
    throw Error(ErrorKind::NumericFailure, "singular value decomposition did not converge");

  const auto& s = svd.singularValues();
  std::vector<double> out(s.data(), s.data() + s.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  if (!out.empty()) {
    const double tol = static_cast<double>(std::max(z.rows(), z.cols())) *
                       Eigen::NumTraits<double>::epsilon() * out.front();
    for (double& v : out)
      if (v <= tol) v = 0.0;
  }
  return out;
}

}  // namespace transrate
