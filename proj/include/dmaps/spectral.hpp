#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "dmaps/geometry.hpp"

namespace dmaps {

/// Leading eigenpairs of a Markov matrix, sorted by |mu| descending.
///
/// Columns of `eigenvectors` are the right eigenvectors phi_k of A, scaled to
/// unit Euclidean norm with the largest-magnitude entry positive. Column 0 is
/// the trivial constant vector with mu_0 = 1. `symmetric_vectors` holds the
/// matching orthonormal eigenvectors of S = D~^{-1/2} W~ D~^{-1/2}, sign-aligned
/// with phi.
struct DiffusionResult {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  Eigen::MatrixXd symmetric_vectors;
  double epsilon = 0.0;
  double alpha = 0.0;
  int tau = 0;

  int num_components() const { return static_cast<int>(eigenvalues.size()); }
  Eigen::Index num_points() const { return eigenvectors.rows(); }
};

/// Diffusion coordinates mu_k^tau phi_k for the selected (nontrivial) indices.
struct Embedding {
  Eigen::MatrixXd coords;
  std::vector<int> selected_indices;
};

/// Computes the top `num_components` eigenpairs of `a` through its symmetric
/// conjugate (LAPACK dsyevr, eigenvalues requested by index). Eigenvalue ties
/// keep the solver's descending order. Throws InvalidParameter unless
/// 2 <= num_components <= m, and NumericalFailure if the solver fails.
DiffusionResult eigendecompose(const MarkovMatrix& a, int num_components);

/// exp(-eps^2 mu_tilde / 4): discrete eigenvalue predicted from a continuous
/// Laplace-Beltrami eigenvalue at kernel scale eps.
double analytic_to_discrete_eigenvalue(double mu_tilde, double epsilon);

/// Throws InvalidParameter if `indices` is empty, not strictly increasing,
/// contains 0, or reaches past the computed spectrum.
Embedding embed(const DiffusionResult& result, std::span<const int> indices, int tau);

/// sqrt(sum_{k in indices} mu_k^{2 tau} (phi_k(i) - phi_k(j))^2). With all
/// nontrivial indices this is the truncated diffusion distance; with the
/// unique set it is the reduced diffusion distance.
double diffusion_distance(const DiffusionResult& result, Eigen::Index i, Eigen::Index j, int tau,
                          std::span<const int> indices);

/// All nontrivial indices 1..K-1.
std::vector<int> nontrivial_indices(const DiffusionResult& result);

}  // namespace dmaps
