#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

#include "test_support.hpp"
#include "transrate/errors.hpp"
#include "transrate/matcore.hpp"

using namespace transrate;
using namespace transrate::testing;

namespace {

FeatureMatrix fm(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return FeatureMatrix(std::move(m));
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

struct SilenceWarnings {
  SilenceWarnings() : previous(set_warning_handler([](std::string_view) {})) {}
  ~SilenceWarnings() { set_warning_handler(std::move(previous)); }
  WarningHandler previous;
};

}  // namespace

TEST_CASE("FeatureMatrix rejects empty and non-finite input") {
  CHECK_THROWS_AS(FeatureMatrix(Matrix(0, 3)), Error);
  Matrix m = Matrix::Ones(2, 2);
  m(1, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    FeatureMatrix f(m);
    FAIL("expected NonFiniteValue");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteValue);
  }
}

TEST_CASE("unit_normalize_rows") {
  SilenceWarnings quiet;

  SUBCASE("3-4-5 row") {
    const auto r = unit_normalize_rows(fm({{3, 4}}));
    CHECK(r.features.data()(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(r.features.data()(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(r.zero_rows == 0);
    CHECK(r.features.unit_normalized());
  }
  SUBCASE("zero row stays zero and is counted") {
    const auto r = unit_normalize_rows(fm({{0, 0}, {1, 0}}));
    CHECK(r.zero_rows == 1);
    CHECK(r.features.data().row(0).norm() == 0.0);
  }
  SUBCASE("random matrix rows become unit") {
    const auto r = unit_normalize_rows(FeatureMatrix(random_matrix(10, 5, 3)));
    for (Index i = 0; i < 10; ++i) CHECK(std::abs(r.features.data().row(i).norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("gram orientation and examples") {
  SUBCASE("identity") {
    const auto g = gram(fm({{1, 0}, {0, 1}}));
    CHECK(g.side == GramOrientation::FeatureSide);
    CHECK(g.matrix.isApprox(Eigen::MatrixXd::Identity(2, 2)));
  }
  SUBCASE("rank-1 sample side") {
    const auto g = gram(fm({{1, 0}, {1, 0}}), SidePolicy::ForceSample);
    CHECK(g.side == GramOrientation::SampleSide);
    CHECK(g.matrix == Eigen::MatrixXd::Ones(2, 2));
  }
  SUBCASE("auto picks the smaller side, feature side on ties") {
    CHECK(gram(FeatureMatrix(random_matrix(4, 4, 1))).side == GramOrientation::FeatureSide);
    CHECK(gram(FeatureMatrix(random_matrix(3, 9, 1))).side == GramOrientation::SampleSide);
    CHECK(gram(FeatureMatrix(random_matrix(9, 3, 1))).side == GramOrientation::FeatureSide);
  }
  SUBCASE("both sides share their nonzero eigenvalues") {
    const FeatureMatrix f(random_matrix(7, 3, 11));
    const auto feat = jacobi_eigenvalues(gram(f, SidePolicy::ForceFeature).matrix);
    const auto samp = jacobi_eigenvalues(gram(f, SidePolicy::ForceSample).matrix);
    REQUIRE(feat.size() == 3);
    REQUIRE(samp.size() == 7);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(feat[i] - samp[i + 4]) <= 1e-9);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(samp[i]) <= 1e-9);
  }
  SUBCASE("output is exactly symmetric") {
    const auto g = gram(FeatureMatrix(random_matrix(50, 300, 5)), SidePolicy::ForceFeature);
    CHECK(g.matrix == g.matrix.transpose());
  }
}

TEST_CASE("gram is bit-identical for any thread count") {
  for (auto policy : {SidePolicy::ForceFeature, SidePolicy::ForceSample}) {
    const FeatureMatrix f(random_matrix(300, 420, 99));
    const auto one = gram(f, policy, 1);
    for (int threads : {2, 3, 8}) {
      const auto many = gram(f, policy, threads);
      REQUIRE(one.matrix.size() == many.matrix.size());
      CHECK(std::memcmp(one.matrix.data(), many.matrix.data(),
                        sizeof(double) * static_cast<std::size_t>(one.matrix.size())) == 0);
    }
  }
}

TEST_CASE("gram overflow is reported") {
  Matrix m = Matrix::Constant(4, 2, 1e200);
  try {
    gram(FeatureMatrix(m));
    FAIL("expected NumericOverflow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NumericOverflow);
  }
}

TEST_CASE("logdet_ipd") {
  SUBCASE("zero matrix") { CHECK(logdet_ipd(Eigen::MatrixXd::Zero(5, 5), 123.0) == 0.0); }
  SUBCASE("identity, alpha 1") {
    CHECK(logdet_ipd(Eigen::MatrixXd::Identity(2, 2), 1.0) ==
          doctest::Approx(2.0 * std::numbers::ln2).epsilon(1e-15));
  }
  SUBCASE("random PSD matches eigenvalue oracle") {
    const Matrix a = random_matrix(9, 6, 21);
    const Eigen::MatrixXd g = a.transpose() * a;
    const double expected = logdet_ipd_oracle(g, 0.37);
    CHECK(std::abs(logdet_ipd(g, 0.37) - expected) <= 1e-9);
  }
  SUBCASE("non-positive alpha is rejected") {
    CHECK_THROWS_AS(logdet_ipd(Eigen::MatrixXd::Identity(2, 2), 0.0), Error);
  }
  SUBCASE("indefinite input falls back to eigenvalues and fails on log of a negative") {
    SilenceWarnings quiet;
    Eigen::MatrixXd g(2, 2);
    g << -2.0, 0.0, 0.0, 1.0;
    try {
      logdet_ipd(g, 1.0);
      FAIL("expected NumericFailure");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NumericFailure);
    }
  }
}

TEST_CASE("singular_values") {
  SUBCASE("diagonal") {
    const auto s = singular_values(fm({{3, 0}, {0, 1}}));
    REQUIRE(s.size() == 2);
    CHECK(s[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(s[1] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("all zeros") {
    const auto s = singular_values(FeatureMatrix(Matrix::Zero(4, 2)));
    CHECK(s == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("rank deficiency gives explicit zeros") {
    const auto s = singular_values(fm({{1, 2, 3}, {2, 4, 6}}));
    REQUIRE(s.size() == 2);
    CHECK(s[0] > 0.0);
    CHECK(s[1] == 0.0);
  }
  SUBCASE("random: squared sum is the Frobenius norm and the coding-rate routes agree") {
    const Matrix z = random_matrix(5, 3, 8);
    const auto s = singular_values(FeatureMatrix(z));
    REQUIRE(s.size() == 3);
    CHECK(std::is_sorted(s.rbegin(), s.rend()));
    double sq = 0.0;
    for (double v : s) sq += v * v;
    CHECK(rel_diff(sq, z.squaredNorm()) <= 1e-8);

    const double eps = 0.05;
    const double alpha = 1.0 / (5 * eps);
    double via_sv = 0.0;
    for (double v : s) via_sv += 0.5 * std::log1p(alpha * v * v);
    const double via_logdet = 0.5 * logdet_ipd(gram(FeatureMatrix(z)), alpha);
    CHECK(std::abs(via_sv - via_logdet) <= 1e-9);
  }
}

TEST_CASE("property: commutativity, singular-value identity, orthogonal invariance") {
  CounterRng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(40));
    const Index d = 1 + static_cast<Index>(rng.below(40));
    const double alpha = std::exp(-6.0 + 10.0 * rng.uniform());
    const FeatureMatrix f(random_matrix(n, d, 1000 + static_cast<std::uint64_t>(trial)));
    CAPTURE(n);
    CAPTURE(d);
    CAPTURE(alpha);

    const double feat = logdet_ipd(gram(f, SidePolicy::ForceFeature), alpha);
    const double samp = logdet_ipd(gram(f, SidePolicy::ForceSample), alpha);
    CHECK(rel_diff(feat, samp) <= 1e-8);

    double via_sv = 0.0;
    for (double s : singular_values(f)) via_sv += std::log1p(alpha * s * s);
    CHECK(rel_diff(feat, via_sv) <= 1e-8);

    const Matrix rotated = f.data() * random_orthogonal(d, 77 + static_cast<std::uint64_t>(trial));
    const FeatureMatrix fr(rotated);
    const auto s0 = singular_values(f);
    const auto s1 = singular_values(fr);
    for (std::size_t i = 0; i < s0.size(); ++i)
      CHECK(std::abs(s0[i] - s1[i]) <= 1e-8 * std::max(1.0, s0.front()));
    CHECK(rel_diff(logdet_ipd(gram(fr), alpha), feat) <= 1e-8);
  }
}
