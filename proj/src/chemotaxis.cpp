#include "dmaps/chemotaxis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>

#include "dmaps/error.hpp"
#include "dmaps/parallel.hpp"

namespace dmaps {
namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 cell_stream(std::uint64_t seed, std::uint64_t cell) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(cell), static_cast<std::uint32_t>(cell >> 32)};
  return std::mt19937_64(seq);
}

void check_config(const JumpConfig& c) {
  if (c.n_cells < 1) throw InvalidParameter("n_cells must be at least 1");
  if (!(c.speed > 0.0) || !std::isfinite(c.speed)) throw InvalidParameter("speed must be positive");
  if (!(c.switch_rate >= 0.0) || !std::isfinite(c.switch_rate)) throw InvalidParameter("switch rate must be >= 0");
  if (!(c.p_right > 0.0 && c.p_right < 1.0)) throw InvalidParameter("p must lie in (0, 1)");
  if (!(c.dt > 0.0 && c.dt <= c.t_max) || !std::isfinite(c.t_max)) {
    throw InvalidParameter("need 0 < dt <= t_max");
  }
}

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

int snapshot_count(const JumpConfig& config) {
  check_config(config);
  const double ratio = config.t_max / config.dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::fabs(ratio - rounded) > 1e-9 * rounded) {
    throw InvalidParameter("t_max / dt must be a positive integer");
  }
  return static_cast<int>(rounded);
}

Trajectory simulate(const JumpConfig& config) {
  const int count = snapshot_count(config);
  const Eigen::Index n = config.n_cells;
  Eigen::MatrixXd x(n, count);
  Eigen::MatrixXd v(n, count);
  Eigen::VectorXi switches = Eigen::VectorXi::Zero(n);
  parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t cell) {
    std::mt19937_64 rng = cell_stream(config.seed, cell);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double s = config.speed;
    double vel = unit(rng) < config.p_right ? s : -s;
    double pos = 0.0;
    double now = 0.0;
    double next = std::numeric_limits<double>::infinity();
    std::exponential_distribution<double> wait(config.switch_rate > 0.0 ? config.switch_rate : 1.0);
    if (config.switch_rate > 0.0) next = wait(rng);
    const auto row = static_cast<Eigen::Index>(cell);
    for (int k = 0; k < count; ++k) {
      const double target = (k + 1) * config.dt;
      while (next < target) {
        pos += vel * (next - now);
        now = next;
        vel = -vel;
        next = now + wait(rng);
        ++switches(row);
      }
      x(row, k) = pos + vel * (target - now);
      v(row, k) = vel;
    }
  });
  Trajectory out;
  out.snapshots.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out.snapshots.push_back({(k + 1) * config.dt, x.col(k), v.col(k)});
  out.switches = std::move(switches);
  return out;
}

std::vector<double> default_p_values(int runs) {
  if (runs < 1) throw InvalidParameter("runs must be at least 1");
  if (runs == 1) return {0.5};
  std::vector<double> p(static_cast<std::size_t>(runs));
  for (int r = 0; r < runs; ++r) p[static_cast<std::size_t>(r)] = 0.1 + 0.8 * r / (runs - 1);
  return p;
}

Eigen::VectorXd position_histogram(const Eigen::VectorXd& positions, double lo, double hi, int bins) {
  if (bins < 1) throw InvalidParameter("bins must be at least 1");
  if (!(hi > lo)) throw DegenerateData("histogram range is empty");
  if (positions.size() == 0) throw InvalidData("no positions to bin");
  const double width = (hi - lo) / bins;
  const double inv_n = 1.0 / static_cast<double>(positions.size());
  Eigen::VectorXd h = Eigen::VectorXd::Zero(bins);
  for (const double xv : positions) {
    const int b = std::clamp(static_cast<int>((xv - lo) / width), 0, bins - 1);
    h(b) += inv_n;
  }
  return h;
}

SnapshotEnsemble build_ensemble(const EnsembleConfig& config) {
  if (config.bins < 1) throw InvalidParameter("bins must be at least 1");
  std::vector<double> p_values = config.p_values;
  if (p_values.empty()) {
    if (config.random_p) {
      std::mt19937_64 rng(mix(config.base.seed, 0xfeedULL));
      std::uniform_real_distribution<double> u(0.1, 0.9);
      for (int r = 0; r < config.runs; ++r) p_values.push_back(u(rng));
    } else {
      p_values = default_p_values(config.runs);
    }
  }
  if (static_cast<int>(p_values.size()) != config.runs) throw InvalidParameter("need one p value per run");

  std::vector<Snapshot> pooled;
  std::vector<int> run_id;
  std::vector<double> p_of_row;
  for (int r = 0; r < config.runs; ++r) {
    JumpConfig c = config.base;
    c.p_right = p_values[static_cast<std::size_t>(r)];
    c.seed = mix(config.base.seed, static_cast<std::uint64_t>(r));
    Trajectory traj = simulate(c);
    for (Snapshot& s : traj.snapshots) {
      pooled.push_back(std::move(s));
      run_id.push_back(r);
      p_of_row.push_back(c.p_right);
    }
  }
  if (pooled.empty()) throw InvalidData("ensemble has no snapshots");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Snapshot& s : pooled) {
    lo = std::min(lo, s.positions.minCoeff());
    hi = std::max(hi, s.positions.maxCoeff());
  }
  if (!(hi > lo)) throw DegenerateData("all pooled cell positions coincide; histogram range is empty");

  const auto m = static_cast<Eigen::Index>(pooled.size());
  const int bins = config.bins;
  const double width = (hi - lo) / bins;
  RowMatrix h(m, bins);
  Eigen::VectorXd t(m);
  Eigen::VectorXd gap(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Snapshot& s = pooled[static_cast<std::size_t>(i)];
    h.row(i) = position_histogram(s.positions, lo, hi, bins).transpose();
    t(i) = s.t;
    const MacroObservables obs = macroscopic_observables(s);
    gap(i) = obs.flux_gap.value_or(std::numeric_limits<double>::quiet_NaN());
  }
  Eigen::VectorXd edges(bins + 1);
  for (int b = 0; b <= bins; ++b) edges(b) = lo + b * width;
  edges(bins) = hi;

  return SnapshotEnsemble{ObservationSet(std::move(h), ObservationKind::Histograms),
                          std::move(edges),
                          std::move(run_id),
                          Eigen::Map<const Eigen::VectorXd>(p_of_row.data(), m),
                          std::move(t),
                          std::move(gap)};
}

Dataset to_dataset(const SnapshotEnsemble& e) {
  const Eigen::Index m = e.histograms.rows();
  Eigen::MatrixXd latent(m, 4);
  for (Eigen::Index i = 0; i < m; ++i) {
    latent(i, 0) = e.p(i);
    latent(i, 1) = e.t(i);
    latent(i, 2) = e.flux_gap(i);
    latent(i, 3) = e.run_id[static_cast<std::size_t>(i)];
  }
  std::string edges;
  for (Eigen::Index b = 0; b < e.bin_edges.size(); ++b) edges += (b ? " " : "") + number(e.bin_edges(b));
  return Dataset{e.histograms,
                 std::move(latent),
                 {"p", "t", "flux_gap", "run_id"},
                 {{"generator", "chemotaxis"}, {"bin_edges", edges}}};
}

MacroObservables macroscopic_observables(const Snapshot& snapshot) {
  double right_sum = 0.0;
  double left_sum = 0.0;
  Eigen::Index right = 0;
  Eigen::Index left = 0;
  for (Eigen::Index c = 0; c < snapshot.positions.size(); ++c) {
    if (snapshot.velocities(c) > 0.0) {
      right_sum += snapshot.positions(c);
      ++right;
    } else {
      left_sum += snapshot.positions(c);
      ++left;
    }
  }
  MacroObservables out;
  out.t = snapshot.t;
  if (right > 0 && left > 0) out.flux_gap = right_sum / right - left_sum / left;
  return out;
}

double abs_pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidData("correlation needs two aligned vectors of length >= 2");
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double sxx = xc.squaredNorm();
  const double syy = yc.squaredNorm();
  if (!(sxx > 0.0) || !(syy > 0.0)) throw InvalidData("correlation of a zero-variance column");
  return std::fabs(xc.dot(yc)) / std::sqrt(sxx * syy);
}

CorrelationReport correlation_report(const Eigen::MatrixXd& embedding, const Eigen::VectorXd& p,
                                     const Eigen::VectorXd& t) {
  if (embedding.cols() != 2) throw InvalidData("correlation_report needs a two-column embedding");
  if (embedding.rows() != p.size() || embedding.rows() != t.size()) {
    throw InvalidData("embedding and latent table have different row counts");
  }
  const double c0p = abs_pearson(embedding.col(0), p);
  const double c1t = abs_pearson(embedding.col(1), t);
  const double c0t = abs_pearson(embedding.col(0), t);
  const double c1p = abs_pearson(embedding.col(1), p);
  if (c0p + c1t >= c0t + c1p) return {c0p, c1t, 0, 1};
  return {c1p, c0t, 1, 0};
}

double telegraph_variance(double speed, double rate, double t) {
  if (!(rate > 0.0)) return speed * speed * t * t;
  const double lt = rate * t;
  return speed * speed / (2.0 * rate * rate) * (2.0 * lt - 1.0 + std::exp(-2.0 * lt));
}

PairRatio ensemble_ratio(const SnapshotEnsemble& ensemble, int num_eigen, double alpha,
                         const SelectionCriterion& criterion) {
  const DistanceMatrix d = emd_distances(ensemble.histograms);
  const MarkovMatrix a = build_markov(d, median_pairwise(d), alpha);
  const DiffusionResult result = eigendecompose(a, num_eigen);
  const ResidualReport report = score_all(result, criterion);
  const UniquePair pair = unique_pair(report);
  PairRatio out{0.0, pair.first, pair.second, pair.fallback};
  out.ratio = dimensionality_ratio(result.eigenvalues(out.first), result.eigenvalues(out.second));
  return out;
}

EnsembleConfig sweep_ensemble_config(const SweepConfig& config, std::size_t i, std::size_t j, int replicate) {
  const double lambda = config.lambdas.at(i);
  const double t_obs = config.t_obs_values.at(j);
  EnsembleConfig ec;
  ec.base.n_cells = config.n_cells;
  ec.base.speed = std::sqrt(lambda);
  ec.base.switch_rate = lambda;
  ec.base.t_max = t_obs * static_cast<double>(config.n_cells);
  ec.base.dt = ec.base.t_max / config.snapshots;
  const std::uint64_t cell_index = i * config.t_obs_values.size() + j;
  ec.base.seed = mix(config.seed, cell_index * 1000 + static_cast<std::uint64_t>(replicate));
  ec.runs = config.runs;
  return ec;
}

SweepGrid dimensionality_sweep(const SweepConfig& config) {
  if (config.lambdas.empty() || config.t_obs_values.empty()) throw InvalidParameter("sweep grids must be nonempty");
  for (const double v : config.lambdas) {
    if (!(v > 0.0)) throw InvalidParameter("sweep lambdas must be positive");
  }
  for (const double v : config.t_obs_values) {
    if (!(v > 0.0)) throw InvalidParameter("sweep t_obs values must be positive");
  }
  if (config.replicates < 1) throw InvalidParameter("replicates must be at least 1");
  if (config.snapshots < 1) throw InvalidParameter("snapshots must be at least 1");

  SweepGrid grid;
  grid.lambdas = config.lambdas;
  grid.t_obs_values = config.t_obs_values;
  grid.replicates = config.replicates;
  for (const double lambda : config.lambdas) grid.boundary_t_obs.push_back(1.0 / lambda);

  std::uint64_t cell_index = 0;
  for (const double lambda : config.lambdas) {
    for (const double t_obs : config.t_obs_values) {
      SweepCell cell;
      cell.lambda = lambda;
      cell.t_obs = t_obs;
      for (int rep = 0; rep < config.replicates; ++rep) {
        const EnsembleConfig ec = sweep_ensemble_config(config, cell_index / config.t_obs_values.size(),
                                                        cell_index % config.t_obs_values.size(), rep);
        try {
          const PairRatio r = ensemble_ratio(build_ensemble(ec), config.num_eigen, config.alpha, config.criterion);
          cell.ratios.push_back(r.ratio);
          if (r.fallback) {
            cell.warn = true;
            cell.messages.push_back("replicate " + std::to_string(rep) +
                                    ": fewer than two unique directions, used two largest residuals");
          }
        } catch (const Error& e) {
          cell.warn = true;
          cell.messages.push_back("replicate " + std::to_string(rep) + ": " + e.what());
        }
      }
      if (cell.ratios.empty()) {
        cell.mean_ratio = std::numeric_limits<double>::quiet_NaN();
      } else {
        double sum = 0.0;
        for (const double r : cell.ratios) sum += r;
        cell.mean_ratio = sum / static_cast<double>(cell.ratios.size());
      }
      grid.cells.push_back(std::move(cell));
      ++cell_index;
    }
  }
  return grid;
}

}  // namespace dmaps
