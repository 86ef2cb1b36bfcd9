#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dmaps/error.hpp"
#include "dmaps/manifolds.hpp"

using namespace dmaps;

namespace {

constexpr double kPi = std::numbers::pi;

double arclength_oracle(double theta) { return 0.5 * (theta * std::sqrt(1 + theta * theta) + std::asinh(theta)); }

// Upper 1% points of the chi-square distribution.
constexpr double kChi2Df19 = 36.191;

}  // namespace

TEST_CASE("strip samples are deterministic and in range") {
  for (auto density : {StripDensity::Uniform, StripDensity::GaussianInZ1}) {
    const StripSpec spec{4.0, 1.0, 500, density, 17};
    const Dataset a = sample_strip(spec);
    const Dataset b = sample_strip(spec);
    CHECK(a.observations.vectors() == b.observations.vectors());
    CHECK(a.latent == a.observations.vectors());
    CHECK(a.latent_names == std::vector<std::string>{"z1", "z2"});
    const auto& z = a.observations.vectors();
    CHECK(z.col(0).minCoeff() >= 0.0);
    CHECK(z.col(0).maxCoeff() <= 4.0);
    CHECK(z.col(1).minCoeff() >= 0.0);
    CHECK(z.col(1).maxCoeff() <= 1.0);
  }
  const Dataset c = sample_strip({4.0, 1.0, 500, StripDensity::Uniform, 18});
  CHECK(c.observations.vectors() != sample_strip({4.0, 1.0, 500, StripDensity::Uniform, 17}).observations.vectors());
}

TEST_CASE("uniform strip mean") {
  const Dataset d = sample_strip({4.0, 1.0, 2000, StripDensity::Uniform, 5});
  const double sd = 4.0 / std::sqrt(12.0) / std::sqrt(2000.0);
  CHECK(std::fabs(d.observations.vectors().col(0).mean() - 2.0) <= 3 * sd);
}

TEST_CASE("gaussian strip concentrates in the middle") {
  const Dataset d = sample_strip({4.0, 1.0, 4000, StripDensity::GaussianInZ1, 6});
  const auto z1 = d.observations.vectors().col(0);
  const double middle = static_cast<double>((z1.array() > 1.0 && z1.array() < 3.0).count()) / 4000.0;
  // P(|Z| < 2 sigma_trunc) for sigma = L1/4 truncated at +-2 sigma: (0.6827) / (0.9545)
  CHECK(middle == doctest::Approx(0.6827 / 0.9545).epsilon(0.04));
}

TEST_CASE("strip parameter checks") {
  CHECK_THROWS_AS(sample_strip({1.0, 2.0, 10, StripDensity::Uniform, 0}), InvalidParameter);
  CHECK_THROWS_AS(sample_strip({1.0, 0.0, 10, StripDensity::Uniform, 0}), InvalidParameter);
  CHECK_THROWS_AS(sample_strip({1.0, 1.0, 1, StripDensity::Uniform, 0}), InvalidParameter);
}

TEST_CASE("strip spectrum") {
  const auto modes = strip_spectrum(4.0, 1.0, 6);
  CHECK(modes.size() == 49);
  CHECK(modes[0].k1 == 0);
  CHECK(modes[0].k2 == 0);
  CHECK(modes[0].mu_tilde == 0.0);
  CHECK(modes[0].value(1.3, 0.2) == 1.0);
  for (std::size_t i = 1; i < modes.size(); ++i) CHECK(modes[i].mu_tilde >= modes[i - 1].mu_tilde);
  for (const auto& m : modes) {
    const double expect = std::pow(m.k1 * kPi / 4.0, 2) + std::pow(m.k2 * kPi / 1.0, 2);
    CHECK(m.mu_tilde == expect);
  }
  CHECK(modes[1].k1 == 1);
  CHECK(modes[2].k1 == 2);
  CHECK(modes[3].k1 == 3);
  CHECK(modes[4].k1 == 0);
  CHECK(modes[4].k2 == 1);
  CHECK(modes[4].value(0.0, 0.5) == doctest::Approx(0.0).scale(1.0));

  const auto unit = strip_spectrum(1.0, 1.0, 1);
  CHECK(unit[1].mu_tilde == doctest::Approx(kPi * kPi));

  for (double l1 : {2.5, 3.0, 8.0}) {
    double mu20 = 0, mu01 = 0;
    for (const auto& m : strip_spectrum(l1, 1.0, 3)) {
      if (m.k1 == 2 && m.k2 == 0) mu20 = m.mu_tilde;
      if (m.k1 == 0 && m.k2 == 1) mu01 = m.mu_tilde;
    }
    CHECK(mu20 < mu01);
  }
  CHECK_THROWS_AS(strip_spectrum(1.0, 1.0, 0), InvalidParameter);
}

TEST_CASE("spiral arclength and its inverse") {
  CHECK(spiral_arclength(0.0) == 0.0);
  for (double th : {0.5, 2.0, 10.0}) CHECK(spiral_arclength(th) == doctest::Approx(arclength_oracle(th)).epsilon(1e-14));
  const double lo = spiral_arclength(kSwissRollThetaMin);
  const double hi = spiral_arclength(kSwissRollThetaMax);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(lo, hi);
  for (int i = 0; i < 1000; ++i) {
    const double s = u(rng);
    const double th = invert_spiral_arclength(s, kSwissRollThetaMin, kSwissRollThetaMax);
    CHECK(std::fabs(arclength_oracle(th) - s) <= 1e-9);
  }
}

TEST_CASE("swiss roll is uniform in arclength") {
  const Dataset d = sample_swiss_roll(40.0, 1500, kSwissRollThetaMin, kSwissRollThetaMax, 4);
  CHECK(d.latent_names == std::vector<std::string>{"theta", "t"});
  const double lo = arclength_oracle(kSwissRollThetaMin);
  const double hi = arclength_oracle(kSwissRollThetaMax);
  std::vector<int> counts(20, 0);
  const auto& x = d.observations.vectors();
  for (Eigen::Index i = 0; i < 1500; ++i) {
    const double th = d.latent(i, 0);
    const double t = d.latent(i, 1);
    CHECK(x(i, 0) * x(i, 0) + x(i, 1) * x(i, 1) == doctest::Approx(th * th).epsilon(1e-12));
    CHECK(x(i, 2) == doctest::Approx(40.0 * t));
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
    const int b = std::min(19, static_cast<int>((arclength_oracle(th) - lo) / (hi - lo) * 20));
    ++counts[static_cast<std::size_t>(b)];
  }
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 75.0) * (c - 75.0) / 75.0;
  CHECK(chi2 < kChi2Df19);
  CHECK(sample_swiss_roll(40.0, 30, kSwissRollThetaMin, kSwissRollThetaMax, 4).observations.vectors() ==
        sample_swiss_roll(40.0, 30, kSwissRollThetaMin, kSwissRollThetaMax, 4).observations.vectors());
  CHECK_THROWS_AS(sample_swiss_roll(0.0, 30), InvalidParameter);
  CHECK_THROWS_AS(sample_swiss_roll(1.0, 30, 2.0, 1.0), InvalidParameter);
}

TEST_CASE("torus points lie on the surface") {
  const Dataset d = sample_torus(10.0, 1.0, 2000, 7);
  const auto& x = d.observations.vectors();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double rho = std::hypot(x(i, 0), x(i, 1)) - 10.0;
    CHECK(std::fabs(rho * rho + x(i, 2) * x(i, 2) - 1.0) <= 1e-12);
    const double t1 = d.latent(i, 0), t2 = d.latent(i, 1);
    CHECK(x(i, 0) == doctest::Approx((10.0 + std::cos(t2)) * std::cos(t1)));
    CHECK(t1 >= 0.0);
    CHECK(t1 < 2 * kPi);
  }
  CHECK_THROWS_AS(sample_torus(1.0, 1.0, 10), InvalidParameter);
  CHECK_THROWS_AS(sample_torus(1.0, 0.0, 10), InvalidParameter);
}
