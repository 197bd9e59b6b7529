#include "transrate/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "transrate/errors.hpp"

namespace transrate {

std::uint64_t CounterRng::next_u64() noexcept {
  std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CounterRng::uniform() noexcept {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t CounterRng::below(std::uint64_t bound) noexcept {
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

Dataset gen_blobs(const BlobSpec& spec) {
  if (spec.means.empty()) throw Error(ErrorKind::InvalidArgument, "blob spec has no classes");
  if (!(spec.stddev > 0.0) || !std::isfinite(spec.stddev))
    throw Error(ErrorKind::InvalidArgument, "blob stddev must be positive");
  if (spec.per_class == 0) throw Error(ErrorKind::InvalidArgument, "blob spec has no samples");
  const std::size_t d = spec.dims();
  if (d == 0) throw Error(ErrorKind::InvalidArgument, "blob means are empty");
  for (const auto& m : spec.means)
    if (m.size() != d) throw Error(ErrorKind::InvalidArgument, "blob means differ in dimension");

  const std::size_t n = spec.classes() * spec.per_class;
  Matrix x(static_cast<Index>(n), static_cast<Index>(d));
  std::vector<std::int32_t> ids(n);
  CounterRng rng(spec.seed);
  std::size_t row = 0;
  for (std::size_t c = 0; c < spec.classes(); ++c)
    for (std::size_t k = 0; k < spec.per_class; ++k, ++row) {
      ids[row] = static_cast<std::int32_t>(c);
      for (std::size_t j = 0; j < d; ++j)
        x(static_cast<Index>(row), static_cast<Index>(j)) =
            spec.means[c][j] + spec.stddev * rng.normal();
    }

  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    if (j != i - 1) {
      x.row(static_cast<Index>(i - 1)).swap(x.row(static_cast<Index>(j)));
      std::swap(ids[i - 1], ids[j]);
    }
  }
  return Dataset{FeatureMatrix(std::move(x)),
                 LabelVector::classification(std::move(ids), static_cast<int>(spec.classes()))};
}

std::vector<SweepLevel> separability_sweep(std::size_t levels, const BlobSpec& base) {
  if (levels < 3) throw Error(ErrorKind::InvalidArgument, "a sweep needs at least 3 levels");
  const std::size_t d = base.dims();
  std::vector<double> centroid(d, 0.0);
  for (const auto& m : base.means)
    for (std::size_t j = 0; j < d; ++j) centroid[j] += m[j];
  for (double& v : centroid) v /= static_cast<double>(base.classes());

  std::vector<SweepLevel> out;
  out.reserve(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    const double factor = static_cast<double>(l) / static_cast<double>(levels - 1);
    BlobSpec spec = base;
    for (std::size_t c = 0; c < spec.classes(); ++c)
      for (std::size_t j = 0; j < d; ++j)
        spec.means[c][j] = centroid[j] + factor * (base.means[c][j] - centroid[j]);
    out.push_back(SweepLevel{factor, gen_blobs(spec)});
  }
  return out;
}

double histogram_mi(const FeatureMatrix& features, const LabelVector& labels, int bins_per_dim) {
  const Matrix& z = features.data();
  const Index n = z.rows();
  const Index d = z.cols();
  if (d > 3) throw Error(ErrorKind::DimensionTooHigh, "histogram MI supports at most 3 dimensions");
  if (bins_per_dim < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 bins per dimension");
  if (labels.kind() != LabelKind::Classification)
    throw Error(ErrorKind::InvalidArgument, "histogram MI needs class labels");
  if (labels.size() != static_cast<std::size_t>(n))
    throw Error(ErrorKind::InvalidArgument, "label count does not match feature rows");
  const auto bins = static_cast<std::int64_t>(bins_per_dim);
  if (static_cast<std::int64_t>(n) < labels.num_classes() * bins)
    throw Error(ErrorKind::TooFewSamples, "histogram MI needs n >= C * bins_per_dim");

  const Eigen::RowVectorXd lo = z.colwise().minCoeff();
  const Eigen::RowVectorXd hi = z.colwise().maxCoeff();

  std::vector<std::int64_t> cell(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    std::int64_t index = 0;
    for (Index j = d - 1; j >= 0; --j) {
      std::int64_t b = 0;
      const double width = hi(j) - lo(j);
      if (width > 0.0) {
        b = static_cast<std::int64_t>(std::floor((z(i, j) - lo(j)) / width * static_cast<double>(bins)));
        b = std::clamp<std::int64_t>(b, 0, bins - 1);
      }
      index = index * bins + b;
    }
    cell[static_cast<std::size_t>(i)] = index;
  }

  const auto ids = labels.class_ids();
  std::map<std::int64_t, std::int64_t> cell_counts;
  std::map<std::pair<std::int64_t, std::int32_t>, std::int64_t> joint_counts;
  for (std::size_t i = 0; i < cell.size(); ++i) {
    ++cell_counts[cell[i]];
    ++joint_counts[{cell[i], ids[i]}];
  }
  const auto class_counts = labels.class_counts();

  const double nn = static_cast<double>(n);
  double mi = 0.0;
  for (const auto& [key, count] : joint_counts) {
    const double nzy = static_cast<double>(count);
    const double nz = static_cast<double>(cell_counts[key.first]);
    const double ny = static_cast<double>(class_counts[static_cast<std::size_t>(key.second)]);
    mi += nzy / nn * std::log(nzy * nn / (nz * ny));
  }
  return mi;
}

namespace bruteforce {

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

void check(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "brute-force metric needs two equal lists of >= 2");
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check(x, y);
  // Pairwise form: sum_{i<j} dx dy / sqrt(sum dx^2 * sum dy^2).
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      sxy += dx * dy;
      sxx += dx * dx;
      syy += dy * dy;
    }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::ZeroVariance, "constant input");
  return sxy / std::sqrt(sxx * syy);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  check(x, y);
  std::int64_t net = 0, untied_x = 0, untied_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const int sx = sign(x[i] - x[j]), sy = sign(y[i] - y[j]);
      net += sx * sy;
      untied_x += sx != 0;
      untied_y += sy != 0;
    }
  if (untied_x == 0 || untied_y == 0) throw Error(ErrorKind::AllTied, "all pairs tied");
  return static_cast<double>(net) /
         std::sqrt(static_cast<double>(untied_x) * static_cast<double>(untied_y));
}

double weighted_tau(std::span<const double> x, std::span<const double> y) {
  check(x, y);
  const std::size_t n = x.size();

  // Per-item integer sums over all partners; each pair contributes
  // (w_i + w_j) * s_ij, which regroups as sum_i w_i * sum_j s_ij.
  std::vector<std::int64_t> net(n, 0), untied_x(n, 0), untied_y(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const int sx = sign(x[i] - x[j]), sy = sign(y[i] - y[j]);
      net[i] += sx * sy;
      untied_x[i] += sx != 0;
      untied_y[i] += sy != 0;
    }

  auto side = [&](std::span<const double> primary, std::span<const double> secondary) {
    // Position of each item: how many items precede it under
    // (primary desc, secondary desc, index asc).
    std::vector<std::size_t> at_rank(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t before = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const bool precedes =
            primary[j] > primary[i] ||
            (primary[j] == primary[i] &&
             (secondary[j] > secondary[i] || (secondary[j] == secondary[i] && j < i)));
        before += precedes;
      }
      at_rank[before] = i;
    }
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double w = 1.0 / (static_cast<double>(r) + 1.0);
      const std::size_t i = at_rank[r];
      num += static_cast<double>(net[i]) * w;
      dx += static_cast<double>(untied_x[i]) * w;
      dy += static_cast<double>(untied_y[i]) * w;
    }
    if (dx == 0.0 || dy == 0.0) throw Error(ErrorKind::AllTied, "all pairs tied");
    return num / std::sqrt(dx * dy);
  };
  return (side(y, x) + side(x, y)) / 2.0;
}

double weighted_tau_pairwise(std::span<const double> x, std::span<const double> y) {
  check(x, y);
  const std::size_t n = x.size();
  auto side = [&](std::span<const double> primary, std::span<const double> secondary) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t before = 0;
      for (std::size_t j = 0; j < n; ++j)
        before += j != i && (primary[j] > primary[i] ||
                             (primary[j] == primary[i] &&
                              (secondary[j] > secondary[i] ||
                               (secondary[j] == secondary[i] && j < i))));
      w[i] = 1.0 / (static_cast<double>(before) + 1.0);
    }
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double pair_weight = w[i] + w[j];
        const int sx = sign(x[i] - x[j]), sy = sign(y[i] - y[j]);
        num += pair_weight * sx * sy;
        if (sx != 0) dx += pair_weight;
        if (sy != 0) dy += pair_weight;
      }
    if (dx == 0.0 || dy == 0.0) throw Error(ErrorKind::AllTied, "all pairs tied");
    return num / std::sqrt(dx * dy);
  };
  return (side(y, x) + side(x, y)) / 2.0;
}

}  // namespace bruteforce

}  // namespace transrate
