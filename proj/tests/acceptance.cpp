// Acceptance runs: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/LU>

#include "baseline_oracles.hpp"
#include "test_support.hpp"
#include "transrate/baselines.hpp"
#include "transrate/errors.hpp"
#include "transrate/oracle.hpp"
#include "transrate/rankeval.hpp"
#include "transrate/transrate.hpp"
#include "transrate/zoo_io.hpp"

using namespace transrate;
using namespace transrate::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ScoreConfig raw_config(double eps) {
  ScoreConfig cfg;
  cfg.eps = eps;
  cfg.unit_norm = false;
  cfg.per_dim = false;
  return cfg;
}

// Reference semantics: slogdet of the d x d matrix through an LU factorization.
double reference_coding_rate(const Matrix& z, double eps) {
  const double n = static_cast<double>(z.rows());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(z.cols(), z.cols()) +
                      (1.0 / (n * eps)) * Eigen::MatrixXd(z.transpose() * z);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  double logdet = 0.0;
  for (Index i = 0; i < a.rows(); ++i) logdet += std::log(std::abs(lu.matrixLU()(i, i)));
  return 0.5 * logdet;
}

double reference_transrate(const Matrix& z, std::span<const std::int32_t> ids, double eps) {
  const int k = *std::max_element(ids.begin(), ids.end()) + 1;
  double rzy = 0.0;
  for (int c = 0; c < k; ++c) rzy += reference_coding_rate(rows_of_class(z, ids, c), eps);
  return reference_coding_rate(z, eps) - rzy / k;
}

double upper_bound(const Matrix& z, std::span<const std::int32_t> ids, int classes, double eps) {
  const double n = static_cast<double>(z.rows());
  double bound = 0.0;
  for (int c = 0; c < classes; ++c) {
    const Matrix zc = rows_of_class(z, ids, c);
    const double nc = static_cast<double>(zc.rows());
    const Eigen::MatrixXd gc = zc.transpose() * zc;
    bound += 0.5 * (logdet_ipd_oracle(gc, 1.0 / (n * eps)) -
                    nc / n * logdet_ipd_oracle(gc, 1.0 / (nc * eps)));
  }
  return bound;
}

Outcome criterion_lemmas() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  CounterRng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const int classes = 2 + static_cast<int>(rng.below(4));
    const Index n = classes + static_cast<Index>(rng.below(static_cast<std::uint64_t>(65 - classes)));
    const Index d = 1 + static_cast<Index>(rng.below(64));
    const double eps = std::exp(-12.0 + 11.0 * rng.uniform());
    const std::uint64_t seed = 10000 + static_cast<std::uint64_t>(trial);
    const Matrix z = random_matrix(n, d, seed);
    const auto ids = random_labels(static_cast<std::size_t>(n), classes, seed);
    const FeatureMatrix f(z);
    const auto labels = LabelVector::classification(ids);
    const std::string at = "trial " + std::to_string(trial);

    const double raw = transrate_terms(f, labels, raw_config(eps)).raw;
    out.require(raw >= -1e-9, at + ": TrR " + num(raw) + " below zero");
    const double ub = upper_bound(z, ids, classes, eps);
    out.require(raw <= ub + 1e-8, at + ": TrR " + num(raw) + " above bound " + num(ub));

    const double alpha = 1.0 / (static_cast<double>(n) * eps);
    const double feat = logdet_ipd(gram(f, SidePolicy::ForceFeature), alpha);
    const double samp = logdet_ipd(gram(f, SidePolicy::ForceSample), alpha);
    out.require(rel_diff(feat, samp) <= 1e-8, at + ": commutative identity off by " +
                                                  num(rel_diff(feat, samp)));
    double via_sv = 0.0;
    for (double s : singular_values(f)) via_sv += std::log1p(alpha * s * s);
    out.require(rel_diff(feat, via_sv) <= 1e-8, at + ": singular-value identity off by " +
                                                    num(rel_diff(feat, via_sv)));

    // Equality case: every class holds the same rows.
    const Index m = std::max<Index>(1, n / classes);
    const Matrix base = random_matrix(m, d, seed + 1);
    Matrix same(m * classes, d);
    std::vector<std::int32_t> same_ids(static_cast<std::size_t>(m * classes));
    for (int c = 0; c < classes; ++c) {
      same.middleRows(c * m, m) = base;
      std::fill_n(same_ids.begin() + c * m, m, c);
    }
    const double eq = transrate_terms(FeatureMatrix(same), LabelVector::classification(same_ids),
                                      raw_config(eps)).raw;
    out.require(std::abs(eq) <= 1e-9, at + ": equality case gives " + num(eq));
  }
  const double secs = seconds_since(t0);
  out.require(secs < 30.0, "took " + num(secs) + " s");
  if (out.pass) out.detail = "1000 instances in " + num(secs) + " s";
  return out;
}

Outcome criterion_reference_parity() {
  Outcome out;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int classes = 2 + trial % 4;
    const Index per = 3 + trial % 9;
    const Index d = 1 + (trial * 7) % 40;
    const Matrix z = random_matrix(per * classes, d, 500 + static_cast<std::uint64_t>(trial));
    std::vector<std::int32_t> ids(static_cast<std::size_t>(per * classes));
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int32_t>(i % static_cast<std::size_t>(classes));
    const double ref = reference_transrate(z, ids, 1e-4);
    const double ours = transrate_terms(FeatureMatrix(z), LabelVector::classification(ids), raw_config(1e-4)).raw;
    const double diff = std::abs(ours - ref) / std::max(1.0, std::abs(ref));
    worst = std::max(worst, diff);
    out.require(diff <= 1e-10, "balanced trial " + std::to_string(trial) + " differs by " + num(diff));
  }
  for (int trial = 0; trial < 20; ++trial) {
    // Class c holds 2 + 5c samples.
    const int classes = 2 + trial % 3;
    std::vector<std::int32_t> ids;
    for (int c = 0; c < classes; ++c) ids.insert(ids.end(), static_cast<std::size_t>(2 + 5 * c), c);
    const Matrix z = random_matrix(static_cast<Index>(ids.size()), 6, 900 + static_cast<std::uint64_t>(trial));
    const auto labels = LabelVector::classification(ids);
    const double ref = reference_transrate(z, ids, 1e-4);
    ScoreConfig uniform = raw_config(1e-4);
    uniform.class_weighting = ClassWeighting::Uniform;
    const double u = transrate_terms(FeatureMatrix(z), labels, uniform).raw;
    const double e = transrate_terms(FeatureMatrix(z), labels, raw_config(1e-4)).raw;
    out.require(std::abs(u - ref) <= 1e-10 * std::max(1.0, std::abs(ref)),
                "imbalanced trial " + std::to_string(trial) + ": Uniform differs by " + num(u - ref));
    out.require(std::abs(e - ref) > 1e-6,
                "imbalanced trial " + std::to_string(trial) + ": Empirical matches the reference");
  }
  if (out.pass) out.detail = "max balanced deviation " + num(worst);
  return out;
}

Outcome criterion_eps_insensitivity() {
  Outcome out;
  // Five models of increasing class separation on the same 4-class task.
  std::vector<Dataset> zoo;
  for (int m = 0; m < 5; ++m) {
    BlobSpec spec;
    for (int c = 0; c < 4; ++c) {
      std::vector<double> mean(16, 0.0);
      mean[static_cast<std::size_t>(c)] = 0.75 * m;
      spec.means.push_back(mean);
    }
    spec.per_class = 100;
    spec.seed = 70 + static_cast<std::uint64_t>(m);
    zoo.push_back(gen_blobs(spec));
  }
  std::vector<std::string> first;
  for (double eps : {1e-4, 1e-6, 1e-8, 1e-10}) {
    ScoreConfig cfg;
    cfg.eps = eps;
    std::vector<TransferScore> scores;
    for (std::size_t m = 0; m < zoo.size(); ++m)
      scores.push_back(transrate_score(zoo[m].features, zoo[m].labels, cfg, "model_" + std::to_string(m)));
    std::vector<std::string> order;
    for (const auto& e : rank_models(scores).entries) order.push_back(e.model_name);
    if (first.empty()) first = order;
    out.require(order == first, "ranking changes at eps " + num(eps));
  }

  const auto blobs = gen_blobs(BlobSpec{{{0, 0, 0, 0, 0, 0}, {1, 1, 0, 0, 0, 0}, {0, 0, 1, 1, 0, 0}}, 1.0, 200, 3});
  const auto z = unit_normalize_rows(blobs.features).features;
  const auto s = singular_values(z);
  const double r = static_cast<double>(std::count_if(s.begin(), s.end(), [](double v) { return v > 0.0; }));
  out.require(r == static_cast<double>(z.cols()), "blobs are not full rank");
  const double eps = 1e-8;
  for (double alpha : {10.0, 100.0}) {
    const double shift = coding_rate(z, alpha * eps) - coding_rate(z, eps) + 0.5 * r * std::log(alpha);
    out.require(std::abs(shift) <= 0.01 * r, "eps shift at alpha " + num(alpha) + " is " + num(shift));
  }
  if (out.pass) out.detail = "ranking stable over 4 eps values; shift identity holds";
  return out;
}

Outcome criterion_proposition_surrogate() {
  Outcome out;
  BlobSpec base;
  for (int c = 0; c < 4; ++c) {
    std::vector<double> mean(16, 0.0);
    mean[static_cast<std::size_t>(c)] = 3.0;
    base.means.push_back(mean);
  }
  base.per_class = 500;
  base.seed = 2024;
  const auto sweep = separability_sweep(10, base);
  std::vector<double> factor, score;
  for (const auto& level : sweep) {
    factor.push_back(level.factor);
    score.push_back(transrate_score(level.data.features, level.data.labels).value);
  }
  for (std::size_t i = 1; i < score.size(); ++i)
    out.require(score[i] > score[i - 1], "TrR not increasing at level " + std::to_string(i));
  const double tau = kendall_tau(factor, score);
  out.require(tau == 1.0, "Kendall tau " + num(tau));

  // 2-D two-class variant scored by both TransRate and the histogram estimator.
  BlobSpec flat{{{3.0, 0.0}, {0.0, 3.0}}, 1.0, 1000, 2025};
  const auto flat_sweep = separability_sweep(10, flat);
  std::vector<double> mi, trr;
  for (const auto& level : flat_sweep) {
    mi.push_back(histogram_mi(level.data.features, level.data.labels, 8));
    trr.push_back(transrate_score(level.data.features, level.data.labels).value);
  }
  const double tau_mi = kendall_tau(mi, trr);
  out.require(tau_mi >= 0.9, "histogram MI vs TrR tau " + num(tau_mi));
  if (out.pass) out.detail = "tau(sep, TrR) = 1, tau(MI, TrR) = " + num(tau_mi);
  return out;
}

// Two classes on rays at +-spread/2 degrees. The coding rate sees the overlap
// |cos(spread)| between class directions, so spread only widens up to 90.
Dataset toy_pair(double spread_deg, double stddev, std::uint64_t seed) {
  const double half = spread_deg / 2.0 * std::numbers::pi / 180.0;
  const double r = 3.0;
  return gen_blobs(BlobSpec{{{r * std::cos(half), r * std::sin(half)},
                             {r * std::cos(half), -r * std::sin(half)}},
                            stddev, 500, seed});
}

Outcome criterion_completeness_compactness() {
  Outcome out;
  int spread_ok = 0, std_ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    bool ok = true;
    double previous = -std::numeric_limits<double>::infinity();
    for (double spread : {15.0, 30.0, 45.0, 60.0, 75.0, 90.0}) {
      const auto d = toy_pair(spread, 0.6, seed);
      const double s = transrate_score(d.features, d.labels).value;
      ok = ok && s > previous;
      previous = s;
    }
    spread_ok += ok;

    ok = true;
    previous = std::numeric_limits<double>::infinity();
    for (double stddev : {0.3, 0.6, 1.0, 1.5, 2.2}) {
      const auto d = toy_pair(90.0, stddev, seed);
      const double s = transrate_score(d.features, d.labels).value;
      ok = ok && s < previous;
      previous = s;
    }
    std_ok += ok;
  }
  out.require(spread_ok == 20, "spread ordering held in " + std::to_string(spread_ok) + "/20 trials");
  out.require(std_ok == 20, "std ordering held in " + std::to_string(std_ok) + "/20 trials");
  if (out.pass) out.detail = "20/20 spread, 20/20 std";
  return out;
}

Outcome criterion_metric_oracles() {
  Outcome out;
  CounterRng rng(606);
  int tied_lists = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    std::vector<double> x(n), y(n);
    if (trial % 2 == 0) {
      const auto lx = 2 + rng.below(10), ly = 2 + rng.below(10);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<double>(rng.below(lx));
        y[i] = static_cast<double>(rng.below(ly));
      }
      ++tied_lists;
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.normal();
        y[i] = 0.3 * x[i] + rng.normal();
      }
    }
    const std::string at = "list " + std::to_string(trial);
    auto both = [&](auto fast, auto slow, const char* name, bool exact) {
      bool fast_failed = false, slow_failed = false;
      double a = 0.0, b = 0.0;
      try { a = fast(); } catch (const Error&) { fast_failed = true; }
      try { b = slow(); } catch (const Error&) { slow_failed = true; }
      out.require(fast_failed == slow_failed, at + ": " + name + " disagree on degeneracy");
      if (!fast_failed && !slow_failed)
        out.require(exact ? a == b : std::abs(a - b) <= 1e-12,
                    at + ": " + name + " " + num(a) + " vs " + num(b));
    };
    both([&] { return pearson(x, y); }, [&] { return bruteforce::pearson(x, y); }, "pearson", false);
    both([&] { return kendall_tau(x, y); }, [&] { return bruteforce::kendall_tau(x, y); }, "kendall", true);
    both([&] { return weighted_tau(x, y); }, [&] { return bruteforce::weighted_tau(x, y); }, "weighted", true);
  }
  if (out.pass) out.detail = "500 lists (" + std::to_string(tied_lists) + " with heavy ties)";
  return out;
}

Outcome criterion_timing() {
  Outcome out;
  constexpr Index n = 50000, d = 512;
  constexpr int classes = 100;
  Matrix z(n, d);
  CounterRng rng(50000);
  std::vector<std::int32_t> ids(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto c = static_cast<std::int32_t>(i % classes);
    ids[static_cast<std::size_t>(i)] = c;
    for (Index j = 0; j < d; ++j) z(i, j) = rng.normal() + (j % classes == c ? 2.0 : 0.0);
  }
  const FeatureMatrix f(std::move(z));
  const auto labels = LabelVector::classification(std::move(ids));

  auto t0 = std::chrono::steady_clock::now();
  const double one = transrate_score(f, labels, {}, "", 1).value;
  const double t_one = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  const double eight = transrate_score(f, labels, {}, "", 8).value;
  const double t_eight = seconds_since(t0);

  out.require(std::memcmp(&one, &eight, sizeof one) == 0, "1 and 8 threads give different scores");
  out.require(t_one <= 10.0, "single thread took " + num(t_one) + " s");
  out.require(t_eight <= 3.0, "8 threads took " + num(t_eight) + " s");
  out.detail = (out.pass ? "" : out.detail + "; ") + "1 thread " + num(t_one) + " s, 8 threads " +
               num(t_eight) + " s, " + std::to_string(std::thread::hardware_concurrency()) +
               " hardware threads";
  return out;
}

Outcome criterion_baselines() {
  Outcome out;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Matrix p = random_matrix(30, 5, seed);
    for (Index i = 0; i < p.rows(); ++i) {
      p.row(i) = p.row(i).array().exp();
      p.row(i) /= p.row(i).sum();
    }
    const auto ids = random_labels(30, 3, seed + 1);
    const auto y = LabelVector::classification(ids);
    const Matrix f = random_matrix(30, 4, seed + 2);
    const std::string at = " (seed " + std::to_string(seed) + ")";
    out.require(rel_diff(leep_score(PseudoLabelMatrix(p), y), leep_oracle(p, ids, 3)) <= 1e-12, "LEEP" + at);
    out.require(rel_diff(nce_score(PseudoLabelMatrix(p), y), nce_oracle(p, ids, 3)) <= 1e-12, "NCE" + at);
    out.require(rel_diff(hscore(FeatureMatrix(f), y), hscore_oracle(f, ids, 3)) <= 1e-9, "H-score" + at);
    out.require(rel_diff(lfc_score(FeatureMatrix(f), y), lfc_oracle(f, ids)) <= 1e-10, "LFC" + at);
  }
  const auto data = gen_blobs(BlobSpec{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, 0.8, 7, 44});
  const Matrix f = data.features.data().topRows(20);
  const std::vector<std::int32_t> ids(data.labels.class_ids().begin(), data.labels.class_ids().begin() + 20);
  const auto r = logme_score(FeatureMatrix(f), LabelVector::classification(ids, 3));
  const double grid = logme_grid_oracle(f, ids, 3);
  const double gap = std::abs(r.value - grid) / std::abs(grid);
  out.require(r.converged, "LogME did not converge");
  out.require(gap <= 0.005, "LogME " + num(r.value) + " vs grid " + num(grid));
  if (out.pass) out.detail = "LogME within " + num(100.0 * gap) + "% of grid";
  return out;
}

Outcome criterion_io() {
  Outcome out;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    CounterRng rng(seed);
    const Index n = 1 + static_cast<Index>(rng.below(40));
    const Index d = 1 + static_cast<Index>(rng.below(40));
    const Matrix m = random_matrix(n, d, seed);
    const std::string bytes = encode_raw_binary(m);
    const std::string again = encode_raw_binary(decode_raw_binary(bytes));
    out.require(bytes == again, "round trip " + std::to_string(seed) + " changed bytes");
  }
  const std::string good = encode_raw_binary(Matrix::Ones(2, 3));
  auto kind = [](const std::string& bytes) {
    try {
      decode_raw_binary(bytes);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  std::string bad_version = good;
  bad_version[4] = 2;
  out.require(kind(bad_magic) == ErrorKind::BadMagic, "bad magic");
  out.require(kind(bad_version) == ErrorKind::VersionUnsupported, "bad version");
  out.require(kind(good.substr(0, 12)) == ErrorKind::TruncatedFile, "short header");
  out.require(kind(good.substr(0, good.size() - 2)) == ErrorKind::TruncatedFile, "short payload");
  out.require(exit_code(ErrorKind::BadMagic) == 2 && exit_code(ErrorKind::TruncatedFile) == 2,
              "I/O errors must exit with code 2");
  if (out.pass) out.detail = "100 byte-identical round trips; header errors classified";
  return out;
}

}  // namespace

int main() {
  set_warning_handler([](std::string_view) {});
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 lemma suite", criterion_lemmas},
      {"2 reference-code parity", criterion_reference_parity},
      {"3 eps insensitivity", criterion_eps_insensitivity},
      {"4 separability surrogate", criterion_proposition_surrogate},
      {"5 completeness/compactness", criterion_completeness_compactness},
      {"6 metric oracles", criterion_metric_oracles},
      {"7 timing", criterion_timing},
      {"8 baseline oracles", criterion_baselines},
      {"9 io round trip", criterion_io},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
