#include "transrate/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "transrate/errors.hpp"

namespace transrate {

namespace {

void require_classification(const LabelVector& labels, Index rows, const char* who) {
  if (labels.kind() != LabelKind::Classification)
    throw Error(ErrorKind::InvalidArgument, std::string(who) + " needs class labels");
  if (labels.size() != static_cast<std::size_t>(rows))
    throw Error(ErrorKind::InvalidArgument,
                std::string(who) + ": label count does not match the number of samples");
}

double sorted_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

// Spectral form of F used by the evidence computations: eigenvalues of
// F^T F (sigma_i = s_i^2) and the squared projections of a target onto the
// corresponding left singular directions.
struct Spectrum {
  Index n = 0;
  Index d = 0;
  Eigen::VectorXd sigma;
  bool sample_side = false;
  Eigen::MatrixXd basis;  // eigenvectors of the smaller Gram
};

Spectrum spectrum_of(const FeatureMatrix& features) {
  const Matrix& f = features.data();
  Spectrum sp;
  sp.n = f.rows();
  sp.d = f.cols();
  sp.sample_side = sp.n < sp.d;
  Eigen::MatrixXd g = sp.sample_side ? Eigen::MatrixXd(f * f.transpose())
                                     : Eigen::MatrixXd(f.transpose() * f);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorKind::NumericFailure, "LogME: eigendecomposition did not converge");
  sp.sigma = eig.eigenvalues();
  sp.basis = eig.eigenvectors();
  const double top = sp.sigma.size() ? sp.sigma.maxCoeff() : 0.0;
  const double tol = static_cast<double>(std::max(sp.n, sp.d)) *
                     std::numeric_limits<double>::epsilon() * top;
  for (Index i = 0; i < sp.sigma.size(); ++i)
    if (sp.sigma(i) <= tol) sp.sigma(i) = 0.0;
  return sp;
}

struct Projection {
  Eigen::VectorXd x2;   // squared coordinates along each eigen-direction
  double residual = 0;  // squared norm outside the column space of F
  double norm2 = 0;
};

Projection project(const Spectrum& sp, const Matrix& f, const Eigen::VectorXd& y) {
  Projection p;
  p.norm2 = y.squaredNorm();
  if (sp.sample_side) {
    p.x2 = (sp.basis.transpose() * y).array().square();
  } else {
    const Eigen::VectorXd fty = f.transpose() * y;
    const Eigen::VectorXd proj = sp.basis.transpose() * fty;
    p.x2 = Eigen::VectorXd::Zero(sp.sigma.size());
    for (Index i = 0; i < sp.sigma.size(); ++i)
      if (sp.sigma(i) > 0.0) p.x2(i) = proj(i) * proj(i) / sp.sigma(i);
  }
  p.residual = std::max(p.norm2 - p.x2.sum(), 0.0);
  return p;
}

struct EvidenceTerms {
  double gamma = 0;
  double m2 = 0;    // |m|^2 for the posterior mean m
  double res2 = 0;  // |F m - y|^2
};

EvidenceTerms evidence_terms(const Spectrum& sp, const Projection& p, double t) {
  EvidenceTerms e;
  e.res2 = p.residual;
  for (Index i = 0; i < sp.sigma.size(); ++i) {
    const double s = sp.sigma(i);
    const double x2 = p.x2(i);
    if (s == 0.0) {
      e.res2 += x2;
      continue;
    }
    const double denom = t + s;
    e.gamma += s / denom;
    e.m2 += s * x2 / (denom * denom);
    e.res2 += x2 * (t / denom) * (t / denom);
  }
  return e;
}

double evidence_per_sample(const Spectrum& sp, const Projection& p, double alpha, double beta) {
  const double n = static_cast<double>(sp.n);
  const double t = alpha / beta;
  const auto e = evidence_terms(sp, p, t);
  // d/2 log(alpha) - 1/2 sum log(alpha + beta sigma_i) == -1/2 sum log(1 + sigma_i / t)
  double logdet = 0.0;
  for (Index i = 0; i < sp.sigma.size(); ++i)
    if (sp.sigma(i) > 0.0) logdet += std::log1p(sp.sigma(i) / t);
  const double ev = -0.5 * logdet + 0.5 * n * std::log(beta) - 0.5 * beta * e.res2 -
                    0.5 * alpha * e.m2 - 0.5 * n * std::log(2.0 * std::numbers::pi);
  return ev / n;
}

struct TargetEvidence {
  double value;
  bool converged;
  int iterations;
};

TargetEvidence maximize_evidence(const Spectrum& sp, const Projection& p) {
  constexpr int kMaxIterations = 100;
  constexpr double kTolerance = 1e-6;
  const double n = static_cast<double>(sp.n);

  double alpha = 1.0, beta = 1.0;
  double previous = -std::numeric_limits<double>::infinity();
  for (int it = 1; it <= kMaxIterations; ++it) {
    const auto e = evidence_terms(sp, p, alpha / beta);
    alpha = e.gamma / (e.m2 + 1e-5);
    beta = (n - e.gamma) / (e.res2 + 1e-5);
    if (alpha == 0.0) {
      // No signal directions: the evidence is that of the noise-only model.
      alpha = std::numeric_limits<double>::min();
    }
    const double ev = evidence_per_sample(sp, p, alpha, beta);
    if (!std::isfinite(ev)) throw Error(ErrorKind::NumericFailure, "LogME evidence is not finite");
    if (std::abs(ev - previous) < kTolerance) return {ev, true, it};
    previous = ev;
  }
  return {previous, false, kMaxIterations};
}

}  // namespace

PseudoLabelMatrix::PseudoLabelMatrix(Matrix probs) : probs_(std::move(probs)) {
  if (probs_.rows() < 1 || probs_.cols() < 1)
    throw Error(ErrorKind::InvalidArgument, "pseudo-label matrix must be non-empty");
  for (Index i = 0; i < probs_.rows(); ++i) {
    double sum = 0.0;
    for (Index j = 0; j < probs_.cols(); ++j) {
      const double v = probs_(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw Error(ErrorKind::InvalidArgument, "pseudo-label entry (" + std::to_string(i) +
                                                    ", " + std::to_string(j) +
                                                    ") is outside [0, 1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw Error(ErrorKind::InvalidArgument,
                  "pseudo-label row " + std::to_string(i) + " does not sum to 1");
  }
}

double leep_score(const PseudoLabelMatrix& pseudo, const LabelVector& labels) {
  const Matrix& p = pseudo.probs();
  require_classification(labels, p.rows(), "LEEP");
  const auto ids = labels.class_ids();
  const Index n = p.rows();
  const Index cs = p.cols();
  const auto num_classes = static_cast<Index>(labels.num_classes());

  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(num_classes, cs);
  for (Index i = 0; i < n; ++i) joint.row(ids[static_cast<std::size_t>(i)]) += p.row(i);
  joint /= static_cast<double>(n);
  const Eigen::RowVectorXd marginal = joint.colwise().sum();

  Eigen::MatrixXd conditional = Eigen::MatrixXd::Zero(num_classes, cs);
  for (Index z = 0; z < cs; ++z)
    if (marginal(z) > 0.0) conditional.col(z) = joint.col(z) / marginal(z);

  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Index y = ids[static_cast<std::size_t>(i)];
    double eep = 0.0;
    for (Index z = 0; z < cs; ++z)
      if (marginal(z) > 0.0) eep += conditional(y, z) * p(i, z);
    total += std::log(eep);
  }
  return std::min(total / static_cast<double>(n), 0.0);
}

double nce_score(const PseudoLabelMatrix& pseudo, const LabelVector& labels) {
  const Matrix& p = pseudo.probs();
  require_classification(labels, p.rows(), "NCE");
  const auto ids = labels.class_ids();
  const Index n = p.rows();
  const Index cs = p.cols();
  const auto num_classes = static_cast<Index>(labels.num_classes());

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(num_classes, cs);
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    for (Index z = 1; z < cs; ++z)
      if (p(i, z) > p(i, best)) best = z;
    counts(ids[static_cast<std::size_t>(i)], best) += 1.0;
  }
  const Eigen::RowVectorXd source_counts = counts.colwise().sum();

  double total = 0.0;
  for (Index z = 0; z < cs; ++z)
    for (Index y = 0; y < num_classes; ++y) {
      const double c = counts(y, z);
      if (c > 0.0) total += c * std::log(c / source_counts(z));
    }
  return std::min(total / static_cast<double>(n), 0.0);
}

double hscore(const FeatureMatrix& features, const LabelVector& labels) {
  const Matrix& f = features.data();
  require_classification(labels, f.rows(), "H-score");
  const Index n = f.rows();
  const Index d = f.cols();
  const double nn = static_cast<double>(n);

  const Eigen::RowVectorXd mean = f.colwise().mean();
  const Matrix centered = f.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / nn;

  const auto members = labels.class_members();
  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(d, d);
  for (const auto& rows : members) {
    if (rows.empty()) continue;
    Eigen::RowVectorXd class_mean = Eigen::RowVectorXd::Zero(d);
    for (Index r : rows) class_mean += centered.row(r);
    class_mean /= static_cast<double>(rows.size());
    between += (static_cast<double>(rows.size()) / nn) * class_mean.transpose() * class_mean;
  }

  const double trace = cov.trace();
  if (!(trace > 0.0))
    throw Error(ErrorKind::SingularCovariance, "H-score: feature covariance is zero");
  cov.diagonal().array() += 1e-8 * trace / static_cast<double>(d);

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::SingularCovariance, "H-score: covariance is not positive definite");
  const double score = llt.solve(between).trace();
  if (!std::isfinite(score))
    throw Error(ErrorKind::SingularCovariance, "H-score: non-finite result");
  return std::max(score, 0.0);
}

double logme_evidence(const FeatureMatrix& features, std::span<const double> target,
                      double alpha, double beta) {
  if (target.size() != static_cast<std::size_t>(features.rows()))
    throw Error(ErrorKind::InvalidArgument, "LogME: target length does not match samples");
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw Error(ErrorKind::InvalidArgument, "LogME: alpha and beta must be positive");
  const auto sp = spectrum_of(features);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
      target.data(), static_cast<Index>(target.size()));
  return evidence_per_sample(sp, project(sp, features.data(), y), alpha, beta);
}

LogMEResult logme_score(const FeatureMatrix& features, const LabelVector& labels) {
  const Matrix& f = features.data();
  if (labels.size() != static_cast<std::size_t>(f.rows()))
    throw Error(ErrorKind::InvalidArgument, "LogME: label count does not match samples");

  const auto sp = spectrum_of(features);
  std::vector<Eigen::VectorXd> targets;
  if (labels.kind() == LabelKind::Regression) {
    const auto v = labels.values();
    targets.emplace_back(Eigen::Map<const Eigen::VectorXd>(v.data(), f.rows()));
  } else {
    const auto ids = labels.class_ids();
    for (int c = 0; c < labels.num_classes(); ++c) {
      Eigen::VectorXd y(f.rows());
      for (Index i = 0; i < f.rows(); ++i)
        y(i) = ids[static_cast<std::size_t>(i)] == c ? 1.0 : 0.0;
      targets.push_back(std::move(y));
    }
  }

  LogMEResult result;
  std::vector<double> values;
  values.reserve(targets.size());
  for (const auto& y : targets) {
    const auto e = maximize_evidence(sp, project(sp, f, y));
    values.push_back(e.value);
    result.converged = result.converged && e.converged;
    result.max_iterations_used = std::max(result.max_iterations_used, e.iterations);
  }
  result.value = sorted_sum(std::move(values)) / static_cast<double>(targets.size());
  if (!result.converged) warn("LogME fixed point did not converge within 100 iterations");
  return result;
}

double lfc_score(const FeatureMatrix& features, const LabelVector& labels) {
  const Matrix& f = features.data();
  require_classification(labels, f.rows(), "LFC");
  const Index n = f.rows();
  const auto num_classes = static_cast<Index>(labels.num_classes());

  const Matrix centered = f.rowwise() - f.colwise().mean();
  if (centered.norm() <= 1e-12 * f.norm())
    throw Error(ErrorKind::ZeroKernel, "LFC: centered feature kernel is zero");

  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, num_classes);
  const auto ids = labels.class_ids();
  for (Index i = 0; i < n; ++i) onehot(i, ids[static_cast<std::size_t>(i)]) = 1.0;
  const Eigen::MatrixXd label_centered = onehot.rowwise() - onehot.colwise().mean();

  // <H K H, H L H> with K = F F^T and L = 2 Y Y^T - 1 1^T, evaluated through
  // the d x C cross product instead of the n x n matrices.
  const double cross = (centered.transpose() * label_centered).squaredNorm();
  const double kernel_norm = (centered.transpose() * centered).norm();
  const double label_norm = (label_centered.transpose() * label_centered).norm();
  if (!(label_norm > 0.0))
    throw Error(ErrorKind::DegenerateLabels, "LFC needs at least two populated classes");
  if (!(kernel_norm > 0.0)) throw Error(ErrorKind::ZeroKernel, "LFC: feature kernel is zero");
  return std::clamp(cross / (kernel_norm * label_norm), -1.0, 1.0);
}

}  // namespace transrate
