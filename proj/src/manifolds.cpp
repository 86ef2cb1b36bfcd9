#include "dmaps/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "dmaps/error.hpp"

namespace dmaps {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kArclengthTolerance = 1e-10;
constexpr int kNewtonMaxIterations = 200;

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_count(Eigen::Index m) {
  if (m < 2) throw InvalidParameter("sample count must be at least 2");
}

}  // namespace

Dataset sample_strip(const StripSpec& spec) {
  if (!(spec.l2 > 0.0) || !(spec.l1 >= spec.l2)) throw InvalidParameter("strip needs l1 >= l2 > 0");
  check_count(spec.m);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u1(0.0, spec.l1);
  std::uniform_real_distribution<double> u2(0.0, spec.l2);
  std::normal_distribution<double> g1(spec.l1 / 2.0, spec.l1 / 4.0);
  RowMatrix z(spec.m, 2);
  for (Eigen::Index i = 0; i < spec.m; ++i) {
    if (spec.density == StripDensity::Uniform) {
      z(i, 0) = u1(rng);
    } else {
      double v = g1(rng);
      while (v < 0.0 || v > spec.l1) v = g1(rng);
      z(i, 0) = v;
    }
    z(i, 1) = u2(rng);
  }
  Eigen::MatrixXd latent = z;
  return Dataset{ObservationSet(std::move(z), ObservationKind::RawPoints),
                 std::move(latent),
                 {"z1", "z2"},
                 {{"generator", "strip"},
                  {"l1", number(spec.l1)},
                  {"l2", number(spec.l2)},
                  {"density", spec.density == StripDensity::Uniform ? "uniform" : "gaussian_z1"},
                  {"gaussian_sigma", spec.density == StripDensity::Uniform ? "none" : number(spec.l1 / 4.0)},
                  {"seed", std::to_string(spec.seed)}}};
}

double AnalyticMode::value(double z1, double z2) const {
  return std::cos(k1 * kPi * z1 / l1) * std::cos(k2 * kPi * z2 / l2);
}

std::vector<AnalyticMode> strip_spectrum(double l1, double l2, int k_max) {
  if (k_max < 1) throw InvalidParameter("strip_spectrum needs k_max >= 1");
  if (!(l1 > 0.0) || !(l2 > 0.0)) throw InvalidParameter("strip lengths must be positive");
  std::vector<AnalyticMode> modes;
  modes.reserve(static_cast<std::size_t>((k_max + 1) * (k_max + 1)));
  for (int k1 = 0; k1 <= k_max; ++k1) {
    for (int k2 = 0; k2 <= k_max; ++k2) {
      const double a = k1 * kPi / l1;
      const double b = k2 * kPi / l2;
      modes.push_back({k1, k2, a * a + b * b, l1, l2});
    }
  }
  std::stable_sort(modes.begin(), modes.end(),
                   [](const AnalyticMode& x, const AnalyticMode& y) { return x.mu_tilde < y.mu_tilde; });
  return modes;
}

double spiral_arclength(double theta) {
  return 0.5 * (theta * std::sqrt(1.0 + theta * theta) + std::asinh(theta));
}

double invert_spiral_arclength(double s, double theta_lo, double theta_hi) {
  double lo = theta_lo;
  double hi = theta_hi;
  double theta = 0.5 * (lo + hi);
  for (int it = 0; it < kNewtonMaxIterations; ++it) {
    const double f = spiral_arclength(theta) - s;
    if (std::fabs(f) <= kArclengthTolerance) return theta;
    if (f > 0.0) {
      hi = theta;
    } else {
      lo = theta;
    }
    double next = theta - f / std::sqrt(1.0 + theta * theta);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == theta) return theta;
    theta = next;
  }
  throw NumericalFailure("spiral arclength inversion did not converge for s = " + number(s));
}

Dataset sample_swiss_roll(double h, Eigen::Index m, double theta_min, double theta_max, std::uint64_t seed) {
  if (!(theta_min > 0.0 && theta_min < theta_max)) throw InvalidParameter("swiss roll needs 0 < theta_min < theta_max");
  if (!(h > 0.0)) throw InvalidParameter("swiss roll height must be positive");
  check_count(m);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> us(spiral_arclength(theta_min), spiral_arclength(theta_max));
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  RowMatrix z(m, 3);
  Eigen::MatrixXd latent(m, 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double theta = invert_spiral_arclength(us(rng), theta_min, theta_max);
    const double t = ut(rng);
    z(i, 0) = theta * std::cos(theta);
    z(i, 1) = theta * std::sin(theta);
    z(i, 2) = h * t;
    latent(i, 0) = theta;
    latent(i, 1) = t;
  }
  return Dataset{ObservationSet(std::move(z), ObservationKind::RawPoints),
                 std::move(latent),
                 {"theta", "t"},
                 {{"generator", "swissroll"},
                  {"h", number(h)},
                  {"theta_min", number(theta_min)},
                  {"theta_max", number(theta_max)},
                  {"seed", std::to_string(seed)}}};
}

Dataset sample_torus(double r1, double r2, Eigen::Index m, std::uint64_t seed) {
  if (!(r2 > 0.0 && r1 > r2)) throw InvalidParameter("torus needs r1 > r2 > 0");
  check_count(m);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  RowMatrix z(m, 3);
  Eigen::MatrixXd latent(m, 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double t1 = angle(rng);
    const double t2 = angle(rng);
    const double ring = r1 + r2 * std::cos(t2);
    z(i, 0) = ring * std::cos(t1);
    z(i, 1) = ring * std::sin(t1);
    z(i, 2) = r2 * std::sin(t2);
    latent(i, 0) = t1;
    latent(i, 1) = t2;
  }
  return Dataset{ObservationSet(std::move(z), ObservationKind::RawPoints),
                 std::move(latent),
                 {"theta1", "theta2"},
                 {{"generator", "torus"}, {"r1", number(r1)}, {"r2", number(r2)}, {"seed", std::to_string(seed)}}};
}

}  // namespace dmaps
