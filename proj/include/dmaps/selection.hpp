#pragma once

// Scores each diffusion-map eigenvector by how well a local linear fit on the
// preceding eigenvectors predicts it under leave-one-out cross-validation.
// Eigenvectors that are functions of earlier ones (harmonics) score near 0;
// new directions score near 1.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "dmaps/spectral.hpp"

namespace dmaps {

/// Predictors Phi_{k-1} (one row per point, one column per earlier
/// eigenvector), target phi_k and the Gaussian regression scale eps_reg.
struct LocalFitContext {
  Eigen::MatrixXd predictors;
  Eigen::VectorXd target;
  double kernel_scale = 0.0;
};

/// Literal refits every held-out point with j != i. Smoother fits with all
/// points and corrects the residual by 1 - h_ii, falling back to the literal
/// solve where the hat diagonal is numerically 1.
enum class LoocvMethod { Literal, Smoother };

/// Relative ridge on the local normal equations, scaled by trace / size.
inline constexpr double kRidgeScale = 1e-10;

/// Above this many points score_all warns about its O(m^2 k^2) cost.
inline constexpr Eigen::Index kLoocvWarnPoints = 5000;

/// sqrt(sum_i (y_i - fit_i)^2 / sum_i y_i^2) where fit_i comes from the local
/// weighted linear fit around point i excluding i itself.
double loocv_residual(const LocalFitContext& ctx, LoocvMethod method = LoocvMethod::Literal);

struct Threshold {
  double value = 0.5;
};
struct TopD {
  int count = 2;
};
using SelectionCriterion = std::variant<Threshold, TopD>;

struct ResidualReport {
  /// residuals[k-1] = r_k for k = 1..K-1; r_1 = 1.
  std::vector<double> residuals;
  std::vector<int> unique_indices;
  SelectionCriterion criterion = Threshold{};
  /// eps_reg_used[k-1] is the regression scale used for r_k (0 for k = 1).
  std::vector<double> eps_reg_used;

  double r(int k) const { return residuals.at(static_cast<std::size_t>(k - 1)); }
  /// Threshold value, or NaN under TopD.
  double threshold() const;
};

/// Residuals r_1..r_{K-1} with eps_reg = (median predictor distance) / 3 for
/// each k. Throws InvalidParameter when K < 3; errors raised for one k are
/// rethrown with that k in the message.
ResidualReport score_all(const DiffusionResult& result, SelectionCriterion criterion = Threshold{},
                         LoocvMethod method = LoocvMethod::Literal);

/// Threshold(t): every k with r_k > t. TopD(d): the d largest residuals in
/// ascending index order (ties go to the lower index).
std::vector<int> select_unique(std::span<const double> residuals, const SelectionCriterion& criterion);

/// First two unique indices, or the two largest residuals (ascending index,
/// fallback = true) when fewer than two were selected.
struct UniquePair {
  int first = 0;
  int second = 0;
  bool fallback = false;
};
UniquePair unique_pair(const ResidualReport& report);

/// L_j = 1/sqrt(-log mu_{i_j}) for each selected index. Only ratios carry
/// meaning. Warns when the decomposition used alpha != 1.
std::vector<double> relative_lengths(const DiffusionResult& result, std::span<const int> indices);

/// sqrt(log mu_1 / log mu_2) for 0 < mu_2 <= mu_1 < 1.
double dimensionality_ratio(double mu_1, double mu_2);

struct EquivalenceReport {
  bool holds = false;
  /// Smallest (rhs - lhs) over both inequalities and all checked pairs.
  double worst_slack = 0.0;
  double k_est = 0.0;
  std::size_t pairs_checked = 0;
  /// Pairs equal in the unique coordinates but not in the repeated ones.
  std::size_t lipschitz_violations = 0;
};

/// Checks D~^2 <= D^2 <= (1 + K^2 sum_{k not in I} mu_k^{2 tau}) D~^2 on random
/// pairs (all pairs when sample_pairs >= m(m-1)/2), where D uses every
/// nontrivial index, D~ only those in I, and K is the largest observed
/// ||dphi_repeated|| / D~ over the checked pairs.
EquivalenceReport equivalence_check(const DiffusionResult& result, std::span<const int> indices, int tau,
                                    std::size_t sample_pairs, std::uint64_t seed = 0);

inline constexpr double kEquivalenceSlack = 1e-9;

}  // namespace dmaps
