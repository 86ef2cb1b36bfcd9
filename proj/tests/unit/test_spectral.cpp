#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "dmaps/error.hpp"
#include "dmaps/geometry.hpp"
#include "dmaps/spectral.hpp"

using namespace dmaps;

namespace {

ObservationSet random_points(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  RowMatrix x(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) x(i, j) = u(rng);
  return ObservationSet(std::move(x), ObservationKind::RawPoints);
}

MarkovMatrix markov_for(const ObservationSet& obs, double eps, double alpha) {
  return build_markov(euclidean_distances(obs), eps, alpha);
}

}  // namespace

TEST_CASE("two points have the closed-form spectrum") {
  RowMatrix x(2, 1);
  x << 0.0, 0.7;
  const double eps = 0.5;
  const double w = std::exp(-0.49 / 0.25);
  for (double alpha : {0.0, 1.0}) {
    const auto r = eigendecompose(markov_for(ObservationSet(x, ObservationKind::RawPoints), eps, alpha), 2);
    CHECK(r.eigenvalues(0) == doctest::Approx(1.0));
    CHECK(r.eigenvalues(1) == doctest::Approx((1.0 - w) / (1.0 + w)).epsilon(1e-12));
    CHECK(r.eigenvectors(0, 0) == doctest::Approx(r.eigenvectors(1, 0)));
    CHECK(r.eigenvectors(0, 1) == doctest::Approx(-r.eigenvectors(1, 1)));
  }
}

TEST_CASE("trivial eigenpair and right eigenvectors") {
  const auto obs = random_points(120, 2, 1);
  for (double alpha : {0.0, 0.5, 1.0}) {
    const MarkovMatrix mk = markov_for(obs, 0.3, alpha);
    const auto r = eigendecompose(mk, 12);
    CHECK(r.num_components() == 12);
    CHECK(r.num_points() == 120);
    CHECK(r.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-10));
    const Eigen::VectorXd phi0 = r.eigenvectors.col(0);
    CHECK((phi0.array() - phi0(0)).abs().maxCoeff() <= 1e-8);
    for (int k = 0; k < 12; ++k) {
      if (k > 0) CHECK(std::fabs(r.eigenvalues(k)) <= std::fabs(r.eigenvalues(k - 1)) + 1e-14);
      const Eigen::VectorXd phi = r.eigenvectors.col(k);
      CHECK(phi.norm() == doctest::Approx(1.0));
      Eigen::Index imax = 0;
      phi.cwiseAbs().maxCoeff(&imax);
      CHECK(phi(imax) > 0.0);
      const Eigen::VectorXd lhs = mk.a * phi;
      CHECK((lhs - r.eigenvalues(k) * phi).norm() <= 1e-9);
    }
  }
}

TEST_CASE("symmetric conjugate matches a dense solver") {
  const auto obs = random_points(80, 3, 2);
  const MarkovMatrix mk = markov_for(obs, 0.4, 1.0);
  const auto r = eigendecompose(mk, 10);
  Eigen::MatrixXd s(80, 80);
  for (int i = 0; i < 80; ++i)
    for (int j = 0; j < 80; ++j) s(i, j) = std::sqrt(mk.dtilde(i)) * mk.a(i, j) / std::sqrt(mk.dtilde(j));
  const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  std::vector<double> all(es.eigenvalues().data(), es.eigenvalues().data() + 80);
  std::sort(all.begin(), all.end(), [](double a, double b) { return std::fabs(a) > std::fabs(b); });
  for (int k = 0; k < 10; ++k) CHECK(r.eigenvalues(k) == doctest::Approx(all[static_cast<std::size_t>(k)]).epsilon(1e-10));

  const Eigen::MatrixXd gram = r.symmetric_vectors.transpose() * r.symmetric_vectors;
  CHECK((gram - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-10);
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXd phi = r.symmetric_vectors.col(k).array() / mk.dtilde.array().sqrt();
    phi.normalize();
    CHECK(std::fabs(phi.dot(r.eigenvectors.col(k))) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(phi.dot(r.eigenvectors.col(k)) > 0.0);
  }
}

TEST_CASE("eigendecompose argument checks") {
  const MarkovMatrix mk = markov_for(random_points(6, 2, 3), 0.5, 1.0);
  CHECK_THROWS_AS(eigendecompose(mk, 1), InvalidParameter);
  CHECK_THROWS_AS(eigendecompose(mk, 7), InvalidParameter);
  CHECK_NOTHROW(eigendecompose(mk, 6));
}

TEST_CASE("analytic eigenvalue mapping") {
  CHECK(analytic_to_discrete_eigenvalue(0.0, 0.3) == 1.0);
  CHECK(analytic_to_discrete_eigenvalue(4.0, 0.5) == doctest::Approx(std::exp(-0.25)));
  CHECK_THROWS_AS(analytic_to_discrete_eigenvalue(-1.0, 0.5), InvalidParameter);
  CHECK_THROWS_AS(analytic_to_discrete_eigenvalue(1.0, 0.0), InvalidParameter);
}

TEST_CASE("embedding coordinates and index checks") {
  const auto r = eigendecompose(markov_for(random_points(50, 2, 4), 0.4, 1.0), 6);
  const std::vector<int> idx{1, 3};
  const Embedding e = embed(r, idx, 2);
  CHECK(e.coords.rows() == 50);
  CHECK(e.coords.cols() == 2);
  CHECK(e.selected_indices == idx);
  for (int i = 0; i < 50; ++i) {
    CHECK(e.coords(i, 0) == doctest::Approx(std::pow(r.eigenvalues(1), 2) * r.eigenvectors(i, 1)));
    CHECK(e.coords(i, 1) == doctest::Approx(std::pow(r.eigenvalues(3), 2) * r.eigenvectors(i, 3)));
  }
  CHECK_THROWS_AS(embed(r, std::vector<int>{}, 0), InvalidParameter);
  CHECK_THROWS_AS(embed(r, std::vector<int>{0, 1}, 0), InvalidParameter);
  CHECK_THROWS_AS(embed(r, std::vector<int>{3, 1}, 0), InvalidParameter);
  CHECK_THROWS_AS(embed(r, std::vector<int>{1, 6}, 0), InvalidParameter);
  CHECK_THROWS_AS(embed(r, std::vector<int>{1}, -1), InvalidParameter);
}

TEST_CASE("diffusion distance matches embedding differences") {
  const auto r = eigendecompose(markov_for(random_points(40, 2, 5), 0.4, 1.0), 8);
  const auto all = nontrivial_indices(r);
  CHECK(all.size() == 7);
  CHECK(all.front() == 1);
  const Embedding e = embed(r, all, 1);
  for (int i = 0; i < 40; i += 7) {
    for (int j = 0; j < 40; j += 5) {
      CHECK(diffusion_distance(r, i, j, 1, all) == doctest::Approx((e.coords.row(i) - e.coords.row(j)).norm()).epsilon(1e-12).scale(1e-14));
      const std::vector<int> sub{2, 5};
      CHECK(diffusion_distance(r, i, j, 1, sub) <= diffusion_distance(r, i, j, 1, all) + 1e-15);
    }
  }
}
