#include "dmaps/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dmaps/error.hpp"

namespace dmaps {
namespace {

void check_indices(const DiffusionResult& result, std::span<const int> indices, bool require_increasing) {
  if (indices.empty()) throw InvalidParameter("eigenvector index list is empty");
  int prev = 0;
  for (const int k : indices) {
    if (k == 0) throw InvalidParameter("index 0 is the trivial constant eigenvector");
    if (k < 0 || k >= result.num_components()) {
      throw InvalidParameter("eigenvector index " + std::to_string(k) + " outside computed range [1, " +
                             std::to_string(result.num_components() - 1) + "]");
    }
    if (require_increasing && k <= prev) throw InvalidParameter("eigenvector indices must be strictly increasing");
    prev = k;
  }
}

}  // namespace

DiffusionResult eigendecompose(const MarkovMatrix& a, int num_components) {
  const Eigen::Index m = a.size();
  if (num_components < 2 || num_components > m) {
    throw InvalidParameter("eigendecompose: need 2 <= K <= m (K=" + std::to_string(num_components) +
                           ", m=" + std::to_string(m) + ")");
  }
  if (!a.a.allFinite() || !a.dtilde.allFinite() || (a.dtilde.array() <= 0.0).any()) {
    throw NumericalFailure("eigendecompose: Markov matrix has non-finite entries or nonpositive row sums");
  }

  // S_ij = sqrt(dt_i) A_ij / sqrt(dt_j); only the lower triangle is read.
  const Eigen::VectorXd sqrt_dt = a.dtilde.cwiseSqrt();
  Eigen::MatrixXd s(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = j; i < m; ++i) s(i, j) = sqrt_dt(i) * a.a(i, j) / sqrt_dt(j);
  }

  const auto n = static_cast<lapack_int>(m);
  const auto k = static_cast<lapack_int>(num_components);
  lapack_int found = 0;
  Eigen::VectorXd w(m);
  Eigen::MatrixXd z(m, num_components);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(num_components));
  const double abstol = LAPACKE_dlamch('S');
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, s.data(), n, 0.0, 0.0, n - k + 1, n,
                                         abstol, &found, w.data(), z.data(), n, support.data());
  if (info != 0 || found != k) {
    throw NumericalFailure("eigendecompose: dsyevr failed (info=" + std::to_string(info) + ", found " +
                           std::to_string(found) + " of " + std::to_string(k) + " eigenpairs, m=" +
                           std::to_string(m) + ")");
  }

  // dsyevr returns ascending eigenvalues; walk them from the top and then
  // stable-sort by magnitude so equal |mu| keep that order.
  std::vector<int> order(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) order[static_cast<std::size_t>(c)] = k - 1 - c;
  std::stable_sort(order.begin(), order.end(), [&](int lhs, int rhs) { return std::fabs(w(lhs)) > std::fabs(w(rhs)); });

  DiffusionResult out;
  out.epsilon = a.epsilon;
  out.alpha = a.alpha;
  out.eigenvalues.resize(k);
  out.eigenvectors.resize(m, k);
  out.symmetric_vectors.resize(m, k);
  for (int c = 0; c < k; ++c) {
    const int src = order[static_cast<std::size_t>(c)];
    out.eigenvalues(c) = w(src);
    Eigen::VectorXd v = z.col(src);
    Eigen::VectorXd phi = v.cwiseQuotient(sqrt_dt);
    phi /= phi.norm();
    Eigen::Index arg = 0;
    phi.cwiseAbs().maxCoeff(&arg);
    if (phi(arg) < 0.0) {
      phi = -phi;
      v = -v;
    }
    out.eigenvectors.col(c) = phi;
    out.symmetric_vectors.col(c) = v;
  }
  return out;
}

double analytic_to_discrete_eigenvalue(double mu_tilde, double epsilon) {
  if (!(mu_tilde >= 0.0)) throw InvalidParameter("analytic eigenvalue must be nonnegative");
  if (!(epsilon > 0.0)) throw InvalidParameter("epsilon must be positive");
  return std::exp(-epsilon * epsilon * mu_tilde / 4.0);
}

Embedding embed(const DiffusionResult& result, std::span<const int> indices, int tau) {
  if (tau < 0) throw InvalidParameter("tau must be nonnegative");
  check_indices(result, indices, true);
  Embedding out;
  out.selected_indices.assign(indices.begin(), indices.end());
  out.coords.resize(result.num_points(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t c = 0; c < indices.size(); ++c) {
    const int k = indices[c];
    const double scale = std::pow(result.eigenvalues(k), tau);
    out.coords.col(static_cast<Eigen::Index>(c)) = scale * result.eigenvectors.col(k);
  }
  return out;
}

double diffusion_distance(const DiffusionResult& result, Eigen::Index i, Eigen::Index j, int tau,
                          std::span<const int> indices) {
  if (tau < 0) throw InvalidParameter("tau must be nonnegative");
  if (i < 0 || j < 0 || i >= result.num_points() || j >= result.num_points()) {
    throw InvalidParameter("diffusion_distance: observation index out of range");
  }
  check_indices(result, indices, false);
  double sum = 0.0;
  for (const int k : indices) {
    const double diff = result.eigenvectors(i, k) - result.eigenvectors(j, k);
    sum += std::pow(result.eigenvalues(k), 2 * tau) * diff * diff;
  }
  return std::sqrt(sum);
}

std::vector<int> nontrivial_indices(const DiffusionResult& result) {
  std::vector<int> out(static_cast<std::size_t>(result.num_components() - 1));
  std::iota(out.begin(), out.end(), 1);
  return out;
}

}  // namespace dmaps
