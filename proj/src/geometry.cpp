#include "dmaps/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dmaps/error.hpp"
#include "dmaps/parallel.hpp"
#include "dmaps/simd.hpp"

namespace dmaps {
namespace {

void check_histogram(std::span<const double> h, const char* what) {
  double sum = 0.0;
  for (const double v : h) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidData(std::string(what) + ": histogram has a negative or non-finite bin");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > kHistogramSumTolerance) {
    throw InvalidData(std::string(what) + ": histogram mass " + std::to_string(sum) + " differs from 1");
  }
}

// Fills a symmetric matrix row by row: row i is the accumulation over the
// columns of `columns` (one column per coordinate) against row i's own values.
// Both (i, j) and (j, i) see the same operand sequence, so the result is
// exactly symmetric with an exact zero diagonal.
template <typename Accumulate>
RowMatrix accumulate_pairwise(const Eigen::MatrixXd& columns, Accumulate accumulate) {
  const Eigen::Index m = columns.rows();
  const Eigen::Index n = columns.cols();
  RowMatrix out = RowMatrix::Zero(m, m);
  parallel_for(0, static_cast<std::size_t>(m), [&](std::size_t i) {
    std::span<double> row(out.data() + i * m, static_cast<std::size_t>(m));
    for (Eigen::Index c = 0; c < n; ++c) {
      std::span<const double> col(columns.col(c).data(), static_cast<std::size_t>(m));
      accumulate(row, col, columns(static_cast<Eigen::Index>(i), c));
    }
  });
  return out;
}

}  // namespace

ObservationSet::ObservationSet(RowMatrix vectors, ObservationKind kind) : vectors_(std::move(vectors)), kind_(kind) {
  if (vectors_.rows() < 2) throw InvalidData("observation set needs at least two observations");
  if (vectors_.cols() < 1) throw InvalidData("observations must have at least one coordinate");
  if (!vectors_.allFinite()) throw InvalidData("observation set contains non-finite entries");
  if (kind_ == ObservationKind::Histograms) {
    for (Eigen::Index i = 0; i < vectors_.rows(); ++i) check_histogram(row(i), "observation set");
  }
}

DistanceMatrix::DistanceMatrix(RowMatrix d, Metric metric) : d_(std::move(d)), metric_(metric) {
  if (d_.rows() != d_.cols()) throw InvalidData("distance matrix must be square");
  if (!d_.allFinite()) throw InvalidData("distance matrix contains non-finite entries");
  for (Eigen::Index i = 0; i < d_.rows(); ++i) {
    if (d_(i, i) != 0.0) throw InvalidData("distance matrix diagonal must be zero");
    for (Eigen::Index j = i + 1; j < d_.cols(); ++j) {
      if (d_(i, j) < 0.0 || d_(i, j) != d_(j, i)) throw InvalidData("distance matrix must be symmetric and nonnegative");
    }
  }
}

DistanceMatrix euclidean_distances(const ObservationSet& obs) {
  const Eigen::MatrixXd columns = obs.vectors();
  RowMatrix sq = accumulate_pairwise(columns, [](std::span<double> row, std::span<const double> col, double c) {
    simd::accumulate_squared_difference(row, col, c);
  });
  return DistanceMatrix(sq.cwiseSqrt(), Metric::Euclidean);
}

double emd_1d(std::span<const double> hist_a, std::span<const double> hist_b) {
  if (hist_a.size() != hist_b.size()) throw InvalidData("emd_1d: histograms have different lengths");
  if (hist_a.empty()) throw InvalidData("emd_1d: empty histograms");
  check_histogram(hist_a, "emd_1d");
  check_histogram(hist_b, "emd_1d");
  std::vector<double> cdf_a(hist_a.size());
  std::vector<double> cdf_b(hist_b.size());
  double ca = 0.0;
  double cb = 0.0;
  for (std::size_t l = 0; l < hist_a.size(); ++l) {
    ca += hist_a[l];
    cb += hist_b[l];
    cdf_a[l] = ca;
    cdf_b[l] = cb;
  }
  return simd::l1_distance(cdf_a, cdf_b);
}

DistanceMatrix emd_distances(const ObservationSet& obs) {
  if (obs.kind() != ObservationKind::Histograms) throw InvalidData("emd_distances requires histogram observations");
  const Eigen::Index m = obs.rows();
  const Eigen::Index n = obs.dims();
  Eigen::MatrixXd cdf(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    double c = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) {
      c += obs.vectors()(i, l);
      cdf(i, l) = c;
    }
  }
  RowMatrix d = accumulate_pairwise(cdf, [](std::span<double> row, std::span<const double> col, double c) {
    simd::accumulate_abs_difference(row, col, c);
  });
  return DistanceMatrix(std::move(d), Metric::EMD);
}

DistanceMatrix pairwise_distances(const ObservationSet& obs, Metric metric) {
  return metric == Metric::EMD ? emd_distances(obs) : euclidean_distances(obs);
}

double median_in_place(std::span<double> values) {
  if (values.empty()) throw InvalidData("median of an empty set");
  const std::size_t count = values.size();
  const std::size_t mid = count / 2;
  const auto mid_it = values.begin() + static_cast<std::ptrdiff_t>(mid);
  std::nth_element(values.begin(), mid_it, values.end());
  double median = *mid_it;
  if (count % 2 == 0) median = 0.5 * (*std::max_element(values.begin(), mid_it) + median);
  return median;
}

double median_pairwise(const DistanceMatrix& d) {
  const Eigen::Index m = d.size();
  if (m < 2) throw InvalidData("median_pairwise needs at least two observations");
  std::vector<double> upper;
  upper.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) upper.push_back(d(i, j));
  }
  const double median = median_in_place(upper);
  if (!(median > 0.0)) throw DegenerateData("median pairwise distance is zero; kernel scale would vanish");
  return median;
}

MarkovMatrix build_markov(const DistanceMatrix& d, double epsilon, double alpha) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidParameter("build_markov: epsilon must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidParameter("build_markov: alpha must lie in [0, 1]");
  const Eigen::Index m = d.size();
  const double inv_eps2 = 1.0 / (epsilon * epsilon);

  MarkovMatrix out;
  out.epsilon = epsilon;
  out.alpha = alpha;
  out.a.resize(m, m);
  Eigen::VectorXd degree(m);
  parallel_for(0, static_cast<std::size_t>(m), [&](std::size_t iu) {
    const auto i = static_cast<Eigen::Index>(iu);
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double dij = d(i, j);
      const double w = std::exp(-dij * dij * inv_eps2);
      out.a(i, j) = w;
      sum += w;
    }
    degree(i) = sum;
  });

  Eigen::VectorXd scale(m);
  for (Eigen::Index i = 0; i < m; ++i) scale(i) = 1.0 / std::pow(degree(i), alpha);

  out.dtilde.resize(m);
  parallel_for(0, static_cast<std::size_t>(m), [&](std::size_t iu) {
    const auto i = static_cast<Eigen::Index>(iu);
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double w = out.a(i, j) * scale(i) * scale(j);
      out.a(i, j) = w;
      sum += w;
    }
    out.dtilde(i) = sum;
    out.a.row(i) /= sum;
  });
  return out;
}

}  // namespace dmaps
