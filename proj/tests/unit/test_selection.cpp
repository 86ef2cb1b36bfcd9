#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dmaps/diagnostics.hpp"
#include "dmaps/error.hpp"
#include "dmaps/geometry.hpp"
#include "dmaps/manifolds.hpp"
#include "dmaps/selection.hpp"

using namespace dmaps;

namespace {

constexpr double kPi = std::numbers::pi;

// Leave-one-out residual by direct weighted least squares at every point.
double oracle_residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double eps) {
  const Eigen::Index m = x.rows();
  const Eigen::Index q = x.cols() + 1;
  double num = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::MatrixXd a(m - 1, q);
    Eigen::VectorXd b(m - 1);
    Eigen::Index r = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      const double w = std::exp(-(x.row(i) - x.row(j)).squaredNorm() / (eps * eps));
      const double sw = std::sqrt(w);
      a(r, 0) = sw;
      a.block(r, 1, 1, q - 1) = sw * x.row(j);
      b(r) = sw * y(j);
      ++r;
    }
    const Eigen::VectorXd beta = a.colPivHouseholderQr().solve(b);
    const double fit = beta(0) + x.row(i).dot(beta.tail(q - 1));
    num += (y(i) - fit) * (y(i) - fit);
  }
  return std::sqrt(num / y.squaredNorm());
}

Eigen::MatrixXd uniform(Eigen::Index m, Eigen::Index p, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd x(m, p);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = u(rng);
  return x;
}

DiffusionResult synthetic_result(Eigen::Index m, std::uint64_t seed) {
  const Eigen::MatrixXd uv = uniform(m, 2, seed, 0.0, 1.0);
  DiffusionResult r;
  r.eigenvalues.resize(5);
  r.eigenvalues << 1.0, 0.95, 0.85, 0.8, 0.6;
  r.eigenvectors.resize(m, 5);
  r.eigenvectors.col(0).setConstant(1.0);
  r.eigenvectors.col(1) = (kPi * uv.col(0).array()).cos();
  r.eigenvectors.col(2) = (2 * kPi * uv.col(0).array()).cos();
  r.eigenvectors.col(3) = (kPi * uv.col(1).array()).cos();
  r.eigenvectors.col(4) = (kPi * uv.col(0).array()).cos() * (kPi * uv.col(1).array()).cos();
  for (int k = 0; k < 5; ++k) r.eigenvectors.col(k).normalize();
  r.symmetric_vectors = r.eigenvectors;
  r.epsilon = 1.0;
  r.alpha = 1.0;
  return r;
}

}  // namespace

TEST_CASE("loocv matches direct weighted least squares") {
  const Eigen::MatrixXd x = uniform(60, 2, 1);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 0.1);
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i) y(i) = std::sin(3 * x(i, 0)) + x(i, 1) * x(i, 1) + g(rng);
  for (double eps : {0.2, 0.5, 2.0}) {
    const double expect = oracle_residual(x, y, eps);
    const LocalFitContext ctx{x, y, eps};
    CHECK(loocv_residual(ctx, LoocvMethod::Literal) == doctest::Approx(expect).epsilon(1e-7));
    CHECK(loocv_residual(ctx, LoocvMethod::Smoother) == doctest::Approx(expect).epsilon(1e-7));
  }
}

TEST_CASE("literal and smoother paths agree") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Eigen::MatrixXd x = uniform(150, 3, seed);
    const Eigen::VectorXd y = (2.0 * x.col(0)).array().sin() * x.col(2).array();
    for (double eps : {0.1, 0.3, 1.0}) {
      const LocalFitContext ctx{x, y, eps};
      CHECK(std::fabs(loocv_residual(ctx, LoocvMethod::Literal) - loocv_residual(ctx, LoocvMethod::Smoother)) <= 1e-8);
    }
  }
}

TEST_CASE("linear targets are reproduced") {
  const Eigen::MatrixXd x = uniform(200, 2, 3);
  const Eigen::VectorXd y = 2.0 + 3.0 * x.col(0).array() - x.col(1).array();
  const LocalFitContext ctx{x, y, 0.3};
  CHECK(loocv_residual(ctx) <= 1e-8);
  CHECK(loocv_residual(ctx, LoocvMethod::Smoother) <= 1e-8);
}

TEST_CASE("smooth functions of a dense 1-d predictor score low") {
  Eigen::MatrixXd x(400, 1);
  for (int i = 0; i < 400; ++i) x(i, 0) = -1.0 + 2.0 * i / 399.0;
  const Eigen::VectorXd sq = x.col(0).array().square();
  const Eigen::VectorXd harmonic = (2 * kPi * x.col(0).array()).cos();
  CHECK(loocv_residual({x, sq, 0.05}) <= 0.05);
  CHECK(loocv_residual({x, harmonic, 0.05}) <= 0.05);
}

TEST_CASE("noise scores high") {
  const Eigen::MatrixXd x = uniform(300, 1, 4);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Eigen::VectorXd y(300);
  for (auto& v : y) v = g(rng);
  CHECK(loocv_residual({x, y, 0.1}) > 0.7);
}

TEST_CASE("residual is invariant to scaling the target") {
  const Eigen::MatrixXd x = uniform(120, 2, 6);
  const Eigen::VectorXd y = x.col(0).array().cube() + (3 * x.col(1).array()).cos();
  for (auto method : {LoocvMethod::Literal, LoocvMethod::Smoother}) {
    const double base = loocv_residual({x, y, 0.3}, method);
    for (double c : {-3.0, 1e-4, 250.0}) {
      CHECK(std::fabs(loocv_residual({x, c * y, 0.3}, method) - base) <= 1e-10);
    }
  }
}

TEST_CASE("loocv argument checks") {
  const Eigen::MatrixXd x = uniform(10, 2, 7);
  const Eigen::VectorXd y = x.col(0);
  CHECK_THROWS_AS(loocv_residual({Eigen::MatrixXd(10, 0), y, 0.3}), InvalidParameter);
  CHECK_THROWS_AS(loocv_residual({x.topRows(3), y.head(3), 0.3}), InvalidParameter);
  CHECK_THROWS_AS(loocv_residual({x, y, 0.0}), InvalidParameter);
  CHECK_THROWS_AS(loocv_residual({x, y.head(9), 0.3}), InvalidData);
  CHECK_THROWS_AS(loocv_residual({x, Eigen::VectorXd::Zero(10), 0.3}), InvalidData);
}

TEST_CASE("score_all separates harmonics from new directions") {
  const DiffusionResult r = synthetic_result(600, 8);
  const ResidualReport lit = score_all(r, Threshold{0.5}, LoocvMethod::Literal);
  const ResidualReport sm = score_all(r, Threshold{0.5}, LoocvMethod::Smoother);
  REQUIRE(lit.residuals.size() == 4);
  CHECK(lit.r(1) == 1.0);
  CHECK(lit.eps_reg_used[0] == 0.0);
  CHECK(lit.r(2) < 0.1);
  CHECK(lit.r(3) > 0.9);
  CHECK(lit.r(4) < 0.3);
  CHECK(lit.unique_indices == std::vector<int>{1, 3});
  CHECK(lit.threshold() == 0.5);
  for (int k = 1; k <= 4; ++k) CHECK(std::fabs(lit.r(k) - sm.r(k)) <= 1e-8);

  // eps_reg is a third of the median predictor distance
  std::vector<double> d;
  for (Eigen::Index i = 0; i < 600; ++i)
    for (Eigen::Index j = i + 1; j < 600; ++j) d.push_back(std::fabs(r.eigenvectors(i, 1) - r.eigenvectors(j, 1)));
  std::nth_element(d.begin(), d.begin() + static_cast<long>(d.size() / 2), d.end());
  const double hi = d[d.size() / 2];
  const double lo = *std::max_element(d.begin(), d.begin() + static_cast<long>(d.size() / 2));
  CHECK(lit.eps_reg_used[1] == doctest::Approx((lo + hi) / 6.0));

  const ResidualReport top = score_all(r, TopD{2});
  CHECK(top.unique_indices == std::vector<int>{1, 3});
  CHECK(std::isnan(top.threshold()));
}

TEST_CASE("score_all reports the failing eigenvector") {
  DiffusionResult r = synthetic_result(50, 9);
  r.eigenvectors.col(3).setZero();
  try {
    score_all(r);
    FAIL("expected an error");
  } catch (const InvalidData& e) {
    CHECK(std::string(e.what()).find("eigenvector 3") != std::string::npos);
  }
  DiffusionResult small = synthetic_result(50, 9);
  small.eigenvalues.conservativeResize(2);
  small.eigenvectors.conservativeResize(50, 2);
  CHECK_THROWS_AS(score_all(small), InvalidParameter);
}

TEST_CASE("select_unique") {
  const std::vector<double> r{1.0, 0.1, 0.8, 0.3, 0.8};
  CHECK(select_unique(r, Threshold{0.5}) == std::vector<int>{1, 3, 5});
  CHECK(select_unique(r, Threshold{0.95}) == std::vector<int>{1});
  CHECK(select_unique(r, TopD{1}) == std::vector<int>{1});
  CHECK(select_unique(r, TopD{2}) == std::vector<int>{1, 3});
  CHECK(select_unique(r, TopD{5}) == std::vector<int>{1, 2, 3, 4, 5});
  CHECK_THROWS_AS(select_unique(r, TopD{0}), InvalidParameter);
  CHECK_THROWS_AS(select_unique(r, TopD{6}), InvalidParameter);

  std::vector<double> transformed;
  for (double v : r) transformed.push_back(std::exp(3 * v) - 2);
  for (int d = 1; d <= 5; ++d) CHECK(select_unique(transformed, TopD{d}) == select_unique(r, TopD{d}));
}

TEST_CASE("unique pair falls back to the two largest residuals") {
  ResidualReport rep;
  rep.residuals = {1.0, 0.2, 0.4, 0.1};
  rep.unique_indices = {1};
  const UniquePair p = unique_pair(rep);
  CHECK(p.first == 1);
  CHECK(p.second == 3);
  CHECK(p.fallback);
  rep.unique_indices = {1, 4};
  const UniquePair q = unique_pair(rep);
  CHECK(q.second == 4);
  CHECK_FALSE(q.fallback);
}

TEST_CASE("length ratios and dimensionality ratio agree") {
  DiffusionResult r = synthetic_result(20, 10);
  const std::vector<int> idx{1, 3};
  const auto l = relative_lengths(r, idx);
  CHECK(l[0] == doctest::Approx(1.0 / std::sqrt(-std::log(0.95))));
  CHECK(l[0] / l[1] == doctest::Approx(1.0 / dimensionality_ratio(0.95, 0.8)));
  CHECK(dimensionality_ratio(std::exp(-1.0), std::exp(-4.0)) == doctest::Approx(0.5));
  CHECK_THROWS_AS(dimensionality_ratio(0.5, 0.9), InvalidParameter);
  CHECK_THROWS_AS(dimensionality_ratio(1.0, 0.9), InvalidParameter);

  r.alpha = 0.5;
  WarningCapture capture;
  relative_lengths(r, idx);
  CHECK(capture.messages().size() == 1);
}

TEST_CASE("reduced distance bounds hold on every pair") {
  const Dataset ds = sample_strip({4.0, 1.0, 180, StripDensity::Uniform, 3});
  const auto r = eigendecompose(build_markov(euclidean_distances(ds.observations), 0.5, 1.0), 10);
  for (int tau : {0, 1}) {
    const ResidualReport rep = score_all(r);
    const EquivalenceReport eq = equivalence_check(r, rep.unique_indices, tau, 1u << 30);
    CHECK(eq.pairs_checked == 180u * 179u / 2u);
    CHECK(eq.holds);
    CHECK(eq.worst_slack >= -kEquivalenceSlack);
    for (Eigen::Index i = 0; i < 180; i += 13) {
      for (Eigen::Index j = i + 1; j < 180; j += 17) {
        CHECK(diffusion_distance(r, i, j, tau, rep.unique_indices) <=
              diffusion_distance(r, i, j, tau, nontrivial_indices(r)) + 1e-14);
      }
    }
  }
  const auto all = nontrivial_indices(r);
  const EquivalenceReport full = equivalence_check(r, all, 1, 500, 4);
  CHECK(full.pairs_checked == 500);
  CHECK(full.holds);
}
