#pragma once

// One-dimensional velocity-jump process: cells move at +-s and reverse at the
// events of a Poisson process with rate lambda. Snapshots of cell positions
// are turned into histograms and analyzed with diffusion maps.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "dmaps/geometry.hpp"
#include "dmaps/manifolds.hpp"
#include "dmaps/selection.hpp"
#include "dmaps/spectral.hpp"

namespace dmaps {

struct JumpConfig {
  Eigen::Index n_cells = 1000;
  double speed = 1.0;
  double switch_rate = 1.0;
  double p_right = 0.5;
  double t_max = 10.0;
  double dt = 1.0;
  std::uint64_t seed = 0;
};

struct Snapshot {
  double t = 0.0;
  Eigen::VectorXd positions;
  Eigen::VectorXd velocities;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  /// Velocity reversals per cell over (0, t_max].
  Eigen::VectorXi switches;
};

/// Number of snapshots t_max / dt; throws InvalidParameter unless it is a
/// positive integer (to 1e-9 relative).
int snapshot_count(const JumpConfig& config);

/// Exact event-driven simulation. All cells start at x = 0 with velocity +s
/// with probability p, otherwise -s. Snapshots are taken at k dt for
/// k = 1..t_max/dt. Each cell draws from its own stream seeded by
/// (seed, cell index), so output does not depend on the thread count.
Trajectory simulate(const JumpConfig& config);

struct EnsembleConfig {
  JumpConfig base;
  int runs = 10;
  /// One p per run; empty means equally spaced over [0.1, 0.9].
  std::vector<double> p_values;
  /// Draw p ~ U[0.1, 0.9] per run instead of spacing them.
  bool random_p = false;
  int bins = 32;
};

struct SnapshotEnsemble {
  ObservationSet histograms;
  Eigen::VectorXd bin_edges;
  std::vector<int> run_id;
  Eigen::VectorXd p;
  Eigen::VectorXd t;
  /// NaN where one of the velocity groups is empty.
  Eigen::VectorXd flux_gap;
};

std::vector<double> default_p_values(int runs);

/// Fraction of `positions` in each of `bins` equal-width bins over [lo, hi];
/// values equal to hi land in the last bin.
Eigen::VectorXd position_histogram(const Eigen::VectorXd& positions, double lo, double hi, int bins);

/// Simulates `runs` trajectories (run r uses p_values[r] and a seed derived
/// from base.seed and r), pools every snapshot, and bins positions into
/// equal-width bins over the pooled [min, max].
SnapshotEnsemble build_ensemble(const EnsembleConfig& config);

/// Histograms as observations with latent columns p, t, flux_gap, run_id.
Dataset to_dataset(const SnapshotEnsemble& ensemble);

struct MacroObservables {
  double t = 0.0;
  /// Mean position of right-moving cells minus that of left-moving cells.
  std::optional<double> flux_gap;
};

MacroObservables macroscopic_observables(const Snapshot& snapshot);

struct CorrelationReport {
  double corr_p = 0.0;
  double corr_t = 0.0;
  /// Embedding column matched to p and to t.
  int column_p = 0;
  int column_t = 1;
};

/// |Pearson correlation| of each embedding column with p and with t, matched
/// by the better of the two column assignments. Throws InvalidData for a
/// zero-variance column or mismatched lengths.
CorrelationReport correlation_report(const Eigen::MatrixXd& embedding, const Eigen::VectorXd& p,
                                     const Eigen::VectorXd& t);

double abs_pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Telegraph-process position variance for symmetric initial velocities.
double telegraph_variance(double speed, double rate, double t);

struct SweepConfig {
  std::vector<double> lambdas;
  std::vector<double> t_obs_values;
  int replicates = 3;
  Eigen::Index n_cells = 1000;
  int runs = 10;
  int snapshots = 10;
  int num_eigen = 10;
  double alpha = 1.0;
  SelectionCriterion criterion = Threshold{};
  std::uint64_t seed = 0;
};

struct SweepCell {
  double lambda = 0.0;
  double t_obs = 0.0;
  double mean_ratio = 0.0;
  std::vector<double> ratios;
  /// Set when a replicate had fewer than two unique directions (its ratio
  /// then uses the two largest residuals) or failed outright.
  bool warn = false;
  std::vector<std::string> messages;
};

struct SweepGrid {
  std::vector<double> lambdas;
  std::vector<double> t_obs_values;
  /// cells[i * t_obs_values.size() + j] holds (lambdas[i], t_obs_values[j]).
  std::vector<SweepCell> cells;
  int replicates = 0;
  /// t_obs = 1 / lambda for each lambda in the grid.
  std::vector<double> boundary_t_obs;

  const SweepCell& at(std::size_t i, std::size_t j) const { return cells.at(i * t_obs_values.size() + j); }
};

/// Unique-pair eigenvalue ratio of one ensemble analyzed with EMD, the median
/// kernel scale and the given selection settings.
struct PairRatio {
  double ratio = 0.0;
  int first = 0;
  int second = 0;
  bool fallback = false;
};
PairRatio ensemble_ratio(const SnapshotEnsemble& ensemble, int num_eigen, double alpha,
                         const SelectionCriterion& criterion);

/// Ensemble settings of one replicate of grid cell (i, j).
EnsembleConfig sweep_ensemble_config(const SweepConfig& config, std::size_t i, std::size_t j, int replicate);

/// For each (lambda, t_obs): t_max = t_obs N, dt = t_max / snapshots,
/// s = sqrt(lambda); averages ensemble_ratio over the replicates.
SweepGrid dimensionality_sweep(const SweepConfig& config);

}  // namespace dmaps
