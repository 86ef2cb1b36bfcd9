#pragma once

// Seeded generators for the strip, Swiss roll and torus test manifolds, and
// the Neumann spectrum of the strip.

#include <Eigen/Dense>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "dmaps/geometry.hpp"

namespace dmaps {

/// Ambient observations plus the latent coordinates that generated them.
struct Dataset {
  ObservationSet observations;
  Eigen::MatrixXd latent;
  std::vector<std::string> latent_names;
  /// Free-form generator parameters, e.g. {"generator", "strip"}.
  std::vector<std::pair<std::string, std::string>> metadata;
};

enum class StripDensity { Uniform, GaussianInZ1 };

struct StripSpec {
  double l1 = 4.0;
  double l2 = 1.0;
  Eigen::Index m = 2000;
  StripDensity density = StripDensity::Uniform;
  std::uint64_t seed = 0;
};

/// z1 ~ U[0, L1] (or N(L1/2, (L1/4)^2) truncated to [0, L1]), z2 ~ U[0, L2].
/// Throws InvalidParameter unless l1 >= l2 > 0 and m >= 2.
Dataset sample_strip(const StripSpec& spec);

/// Neumann eigenpair of the Laplacian on [0, L1] x [0, L2].
struct AnalyticMode {
  int k1 = 0;
  int k2 = 0;
  double mu_tilde = 0.0;
  double l1 = 1.0;
  double l2 = 1.0;

  /// cos(k1 pi z1 / L1) cos(k2 pi z2 / L2)
  double value(double z1, double z2) const;
};

/// All (k_max + 1)^2 modes with k1, k2 <= k_max, ascending in mu_tilde (ties
/// keep k1-major order).
std::vector<AnalyticMode> strip_spectrum(double l1, double l2, int k_max);

/// Arclength of the spiral (theta cos theta, theta sin theta) from 0 to theta.
double spiral_arclength(double theta);

/// Inverse of spiral_arclength on [theta_lo, theta_hi]. Throws
/// NumericalFailure if the safeguarded Newton iteration does not converge.
double invert_spiral_arclength(double s, double theta_lo, double theta_hi);

inline constexpr double kSwissRollThetaMin = 1.5 * std::numbers::pi;
inline constexpr double kSwissRollThetaMax = 4.5 * std::numbers::pi;

/// (theta cos theta, theta sin theta, h t) with theta uniform in arclength and
/// t ~ U[0, 1]. Latent columns: theta, t.
Dataset sample_swiss_roll(double h, Eigen::Index m, double theta_min = kSwissRollThetaMin,
                          double theta_max = kSwissRollThetaMax, std::uint64_t seed = 0);

/// ((r1 + r2 cos t2) cos t1, (r1 + r2 cos t2) sin t1, r2 sin t2) with t1, t2
/// independent U[0, 2 pi). Latent columns: theta1, theta2.
Dataset sample_torus(double r1, double r2, Eigen::Index m, std::uint64_t seed = 0);

}  // namespace dmaps
