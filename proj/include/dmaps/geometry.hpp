#pragma once

// Pairwise distances, Gaussian affinities and the alpha-normalized Markov
// matrix of diffusion maps.

#include <Eigen/Dense>
#include <span>

namespace dmaps {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ObservationKind { RawPoints, Histograms };
enum class Metric { Euclidean, EMD };

/// Tolerance on histogram mass when validating probability vectors.
inline constexpr double kHistogramSumTolerance = 1e-9;

/// m observations of dimension n, one per row. Validated on construction:
/// m >= 2, n >= 1, finite entries, and for histograms nonnegative rows that
/// sum to one.
class ObservationSet {
 public:
  ObservationSet(RowMatrix vectors, ObservationKind kind);

  const RowMatrix& vectors() const { return vectors_; }
  ObservationKind kind() const { return kind_; }
  Eigen::Index rows() const { return vectors_.rows(); }
  Eigen::Index dims() const { return vectors_.cols(); }
  std::span<const double> row(Eigen::Index i) const {
    return {vectors_.data() + i * vectors_.cols(), static_cast<std::size_t>(vectors_.cols())};
  }

 private:
  RowMatrix vectors_;
  ObservationKind kind_;
};

/// Symmetric, nonnegative, zero-diagonal matrix of pairwise distances.
class DistanceMatrix {
 public:
  DistanceMatrix(RowMatrix d, Metric metric);

  const RowMatrix& values() const { return d_; }
  Metric metric() const { return metric_; }
  Eigen::Index size() const { return d_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return d_(i, j); }

 private:
  RowMatrix d_;
  Metric metric_;
};

/// Row-stochastic A = D~^{-1} W~ together with the row sums of W~, which the
/// symmetric eigensolve needs to conjugate A back to a symmetric matrix.
struct MarkovMatrix {
  RowMatrix a;
  double epsilon = 0.0;
  double alpha = 0.0;
  Eigen::VectorXd dtilde;

  Eigen::Index size() const { return a.rows(); }
};

DistanceMatrix euclidean_distances(const ObservationSet& obs);

/// Earth mover's distance between two histograms on the same equally spaced
/// bins: the L1 distance between their cumulative sums, in bin units.
double emd_1d(std::span<const double> hist_a, std::span<const double> hist_b);

DistanceMatrix emd_distances(const ObservationSet& obs);

DistanceMatrix pairwise_distances(const ObservationSet& obs, Metric metric);

/// Median of `values` (mean of the two middle elements for even counts).
/// Reorders `values`. Throws InvalidData when empty.
double median_in_place(std::span<double> values);

/// Median of the m(m-1)/2 strictly-upper-triangular entries. Throws
/// DegenerateData when every off-diagonal distance is zero.
double median_pairwise(const DistanceMatrix& d);

/// Gaussian affinities W = exp(-d^2/eps^2), density normalization
/// W~ = D^-alpha W D^-alpha, and row normalization A = D~^-1 W~.
MarkovMatrix build_markov(const DistanceMatrix& d, double epsilon, double alpha);

}  // namespace dmaps
