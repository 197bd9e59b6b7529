#pragma once

#include "transrate/matcore.hpp"
#include "transrate/transrate.hpp"

namespace transrate {

/// n x C_s softmax outputs of a source classifier on the target samples.
/// Rows must sum to 1 within 1e-6 with entries in [0, 1].
class PseudoLabelMatrix {
 public:
  explicit PseudoLabelMatrix(Matrix probs);

  Index rows() const noexcept { return probs_.rows(); }
  Index cols() const noexcept { return probs_.cols(); }
  const Matrix& probs() const noexcept { return probs_; }

 private:
  Matrix probs_;
};

/// Log expected empirical prediction. Source classes that receive no mass
/// are dropped before forming the empirical conditional p(y | z).
double leep_score(const PseudoLabelMatrix& pseudo, const LabelVector& labels);

/// -H(Y | Y_s) where Y_s is the per-row argmax of the pseudo labels
/// (ties resolve to the lowest source class).
double nce_score(const PseudoLabelMatrix& pseudo, const LabelVector& labels);

/// tr(cov(F)^-1 cov_between(F, Y)) with a 1e-8 * trace / d ridge on cov(F).
double hscore(const FeatureMatrix& features, const LabelVector& labels);

struct LogMEResult {
  double value = 0.0;  // mean over targets of log-evidence per sample
  bool converged = true;
  int max_iterations_used = 0;
};

/// Maximized Bayesian linear-model evidence. Classification labels are
/// scored one-vs-rest; regression labels are used as a single target.
LogMEResult logme_score(const FeatureMatrix& features, const LabelVector& labels);

/// Log evidence per sample of the linear model y = F w + noise with prior
/// w ~ N(0, alpha^-1 I) and noise precision beta, at fixed (alpha, beta).
/// The fixed point in logme_score maximizes this quantity.
double logme_evidence(const FeatureMatrix& features, std::span<const double> target,
                      double alpha, double beta);

/// Cosine similarity between the centered kernel F F^T and the centered
/// label-agreement matrix (+1 same class, -1 otherwise).
double lfc_score(const FeatureMatrix& features, const LabelVector& labels);

}  // namespace transrate
