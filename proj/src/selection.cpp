#include "dmaps/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "dmaps/diagnostics.hpp"
#include "dmaps/error.hpp"
#include "dmaps/geometry.hpp"
#include "dmaps/parallel.hpp"
#include "dmaps/simd.hpp"

namespace dmaps {
namespace {

// 1 - h_ii below this is treated as a singular smoother row.
constexpr double kHatSingular = 1e-6;
// Self weights above exp(30) relative to the nearest neighbor swamp the other
// terms of the full fit; those rows use the literal solve.
constexpr double kSmootherMaxLogWeight = 30.0;

// Elementwise products feeding the local normal equations. With design
// columns X_0 = 1, X_1..X_p = predictors and target y, column (a, b) of the
// Gram block holds X_a * X_b and the trailing q columns hold X_a * y, so a
// weighted sum over points is one dot product with the weight row.
struct ProductColumns {
  Eigen::MatrixXd design;
  Eigen::MatrixXd gram;
  Eigen::MatrixXd moment;
};

ProductColumns make_products(const Eigen::MatrixXd& predictors, const Eigen::VectorXd& target) {
  const Eigen::Index m = predictors.rows();
  const Eigen::Index q = predictors.cols() + 1;
  ProductColumns out;
  out.design.resize(m, q);
  out.design.col(0).setOnes();
  out.design.rightCols(q - 1) = predictors;
  out.gram.resize(m, q * (q + 1) / 2);
  Eigen::Index c = 0;
  for (Eigen::Index a = 0; a < q; ++a) {
    for (Eigen::Index b = a; b < q; ++b) out.gram.col(c++) = out.design.col(a).cwiseProduct(out.design.col(b));
  }
  out.moment.resize(m, q);
  for (Eigen::Index a = 0; a < q; ++a) out.moment.col(a) = out.design.col(a).cwiseProduct(target);
  return out;
}

struct LocalSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

LocalSystem weighted_system(const ProductColumns& p, const double* w) {
  const simd::KernelTable& kt = simd::kernels();
  const auto m = static_cast<std::size_t>(p.design.rows());
  const Eigen::Index q = p.design.cols();
  LocalSystem sys{Eigen::MatrixXd(q, q), Eigen::VectorXd(q)};
  Eigen::Index c = 0;
  for (Eigen::Index a = 0; a < q; ++a) {
    for (Eigen::Index b = a; b < q; ++b) {
      const double v = kt.dot(w, p.gram.col(c++).data(), m);
      sys.a(a, b) = v;
      sys.a(b, a) = v;
    }
    sys.b(a) = kt.dot(w, p.moment.col(a).data(), m);
  }
  return sys;
}

void add_ridge(Eigen::MatrixXd& a, double trace) {
  const double ridge = kRidgeScale * trace / static_cast<double>(a.rows());
  a.diagonal().array() += ridge;
}

double literal_residual(const ProductColumns& p, const Eigen::VectorXd& y, Eigen::Index i, const double* w) {
  LocalSystem sys = weighted_system(p, w);
  add_ridge(sys.a, sys.a.trace());
  const Eigen::VectorXd beta = sys.a.ldlt().solve(sys.b);
  return y(i) - p.design.row(i).dot(beta);
}

// Squared predictor distances, m x m, accumulated one predictor column at a
// time so score_all can extend them as k grows.
void add_column_distances(RowMatrix& d2, const Eigen::VectorXd& column) {
  const Eigen::Index m = d2.rows();
  parallel_for(0, static_cast<std::size_t>(m), [&](std::size_t i) {
    std::span<double> row(d2.data() + i * m, static_cast<std::size_t>(m));
    simd::accumulate_squared_difference(row, {column.data(), static_cast<std::size_t>(m)},
                                        column(static_cast<Eigen::Index>(i)));
  });
}

double median_distance(const RowMatrix& d2) {
  const Eigen::Index m = d2.rows();
  std::vector<double> upper;
  upper.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) upper.push_back(std::sqrt(d2(i, j)));
  }
  const double median = median_in_place(upper);
  if (!(median > 0.0)) throw DegenerateData("median predictor distance is zero");
  return median;
}

double residual_from_distances(const RowMatrix& d2, const Eigen::MatrixXd& predictors, const Eigen::VectorXd& y,
                               double eps_reg, LoocvMethod method) {
  const Eigen::Index m = predictors.rows();
  const double denom = y.squaredNorm();
  if (!(denom > 0.0)) throw InvalidData("loocv target has zero norm");
  const ProductColumns p = make_products(predictors, y);
  const double inv_eps2 = 1.0 / (eps_reg * eps_reg);
  Eigen::VectorXd residual(m);

  parallel_for(0, static_cast<std::size_t>(m), [&](std::size_t iu) {
    const auto i = static_cast<Eigen::Index>(iu);
    thread_local std::vector<double> w;
    w.resize(static_cast<std::size_t>(m));
    const double* row = d2.data() + i * m;
    // Weights are shifted by the nearest neighbor's distance so at least one
    // is exactly 1; the weighted fit is invariant to a common factor.
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j != i) dmin = std::min(dmin, row[j]);
    }
    for (Eigen::Index j = 0; j < m; ++j) w[static_cast<std::size_t>(j)] = std::exp(-(row[j] - dmin) * inv_eps2);
    w[iu] = 0.0;

    if (method == LoocvMethod::Smoother) {
      if (dmin * inv_eps2 <= kSmootherMaxLogWeight) {
        const double self = std::exp(dmin * inv_eps2);
        w[iu] = self;
        LocalSystem sys = weighted_system(p, w.data());
        const Eigen::VectorXd x = p.design.row(i).transpose();
        add_ridge(sys.a, sys.a.trace() - self * x.squaredNorm());
        const auto ldlt = sys.a.ldlt();
        const double hat = self * x.dot(ldlt.solve(x));
        if (1.0 - hat > kHatSingular) {
          residual(i) = (y(i) - x.dot(ldlt.solve(sys.b))) / (1.0 - hat);
          return;
        }
        w[iu] = 0.0;
      }
    }
    residual(i) = literal_residual(p, y, i, w.data());
  });

  return std::sqrt(residual.squaredNorm() / denom);
}

template <typename E>
[[noreturn]] void rethrow_with_index(const E& e, int k) {
  throw E("eigenvector " + std::to_string(k) + ": " + e.what());
}

}  // namespace

double loocv_residual(const LocalFitContext& ctx, LoocvMethod method) {
  const Eigen::Index m = ctx.predictors.rows();
  const Eigen::Index p = ctx.predictors.cols();
  if (p < 1) throw InvalidParameter("loocv needs at least one predictor column");
  if (ctx.target.size() != m) throw InvalidData("loocv target length differs from predictor rows");
  if (m <= p + 1) throw InvalidParameter("loocv needs more points than fitted coefficients");
  if (!(ctx.kernel_scale > 0.0) || !std::isfinite(ctx.kernel_scale)) {
    throw InvalidParameter("loocv kernel scale must be positive");
  }
  if (!ctx.predictors.allFinite() || !ctx.target.allFinite()) throw InvalidData("loocv inputs are not finite");
  RowMatrix d2 = RowMatrix::Zero(m, m);
  for (Eigen::Index c = 0; c < p; ++c) add_column_distances(d2, ctx.predictors.col(c));
  return residual_from_distances(d2, ctx.predictors, ctx.target, ctx.kernel_scale, method);
}

double ResidualReport::threshold() const {
  if (const auto* t = std::get_if<Threshold>(&criterion)) return t->value;
  return std::numeric_limits<double>::quiet_NaN();
}

ResidualReport score_all(const DiffusionResult& result, SelectionCriterion criterion, LoocvMethod method) {
  const int big_k = result.num_components();
  if (big_k < 3) throw InvalidParameter("score_all needs K >= 3 computed eigenvectors");
  const Eigen::Index m = result.num_points();
  if (m > kLoocvWarnPoints) {
    warn("leave-one-out scoring on " + std::to_string(m) + " points is O(m^2 k^2) per eigenvector");
  }

  ResidualReport report;
  report.criterion = criterion;
  report.residuals.assign(1, 1.0);
  report.eps_reg_used.assign(1, 0.0);
  RowMatrix d2 = RowMatrix::Zero(m, m);
  for (int k = 2; k < big_k; ++k) {
    try {
      add_column_distances(d2, result.eigenvectors.col(k - 1));
      const double eps_reg = median_distance(d2) / 3.0;
      const Eigen::MatrixXd predictors = result.eigenvectors.middleCols(1, k - 1);
      if (m <= k) throw InvalidParameter("loocv needs more points than fitted coefficients");
      report.residuals.push_back(
          residual_from_distances(d2, predictors, result.eigenvectors.col(k), eps_reg, method));
      report.eps_reg_used.push_back(eps_reg);
    } catch (const InvalidData& e) {
      rethrow_with_index(e, k);
    } catch (const InvalidParameter& e) {
      rethrow_with_index(e, k);
    } catch (const DegenerateData& e) {
      rethrow_with_index(e, k);
    } catch (const NumericalFailure& e) {
      rethrow_with_index(e, k);
    }
  }
  report.unique_indices = select_unique(report.residuals, criterion);
  return report;
}

std::vector<int> select_unique(std::span<const double> residuals, const SelectionCriterion& criterion) {
  std::vector<int> out;
  if (const auto* t = std::get_if<Threshold>(&criterion)) {
    for (std::size_t c = 0; c < residuals.size(); ++c) {
      if (residuals[c] > t->value) out.push_back(static_cast<int>(c) + 1);
    }
    return out;
  }
  const int d = std::get<TopD>(criterion).count;
  if (d < 1 || static_cast<std::size_t>(d) > residuals.size()) {
    throw InvalidParameter("TopD(" + std::to_string(d) + ") needs 1 <= d <= " + std::to_string(residuals.size()));
  }
  std::vector<int> order(residuals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return residuals[a] > residuals[b]; });
  for (int c = 0; c < d; ++c) out.push_back(order[static_cast<std::size_t>(c)] + 1);
  std::sort(out.begin(), out.end());
  return out;
}

UniquePair unique_pair(const ResidualReport& report) {
  if (report.unique_indices.size() >= 2) return {report.unique_indices[0], report.unique_indices[1], false};
  const std::vector<int> top = select_unique(report.residuals, TopD{2});
  return {top[0], top[1], true};
}

std::vector<double> relative_lengths(const DiffusionResult& result, std::span<const int> indices) {
  if (indices.empty()) throw InvalidParameter("relative_lengths needs at least one index");
  if (result.alpha != 1.0) warn("relative lengths assume density-normalized kernels (alpha = 1)");
  std::vector<double> out;
  out.reserve(indices.size());
  for (const int k : indices) {
    if (k < 1 || k >= result.num_components()) throw InvalidParameter("relative_lengths: index out of range");
    const double mu = result.eigenvalues(k);
    if (!(mu > 0.0 && mu < 1.0)) {
      throw InvalidParameter("relative_lengths: eigenvalue " + std::to_string(mu) + " at index " +
                             std::to_string(k) + " outside (0, 1)");
    }
    out.push_back(1.0 / std::sqrt(-std::log(mu)));
  }
  return out;
}

double dimensionality_ratio(double mu_1, double mu_2) {
  if (!(mu_1 > 0.0 && mu_1 < 1.0 && mu_2 > 0.0 && mu_2 < 1.0)) {
    throw InvalidParameter("dimensionality_ratio: eigenvalues must lie in (0, 1)");
  }
  if (mu_2 > mu_1) throw InvalidParameter("dimensionality_ratio: expects mu_2 <= mu_1");
  return std::sqrt(std::log(mu_1) / std::log(mu_2));
}

EquivalenceReport equivalence_check(const DiffusionResult& result, std::span<const int> indices, int tau,
                                    std::size_t sample_pairs, std::uint64_t seed) {
  if (indices.empty()) throw InvalidParameter("equivalence_check needs a nonempty index set");
  if (tau < 0) throw InvalidParameter("tau must be nonnegative");
  const int big_k = result.num_components();
  const Eigen::Index m = result.num_points();
  std::vector<bool> in_set(static_cast<std::size_t>(big_k), false);
  for (const int k : indices) {
    if (k < 1 || k >= big_k) throw InvalidParameter("equivalence_check: index out of range");
    in_set[static_cast<std::size_t>(k)] = true;
  }
  std::vector<int> repeated;
  double tail = 0.0;
  for (int k = 1; k < big_k; ++k) {
    if (!in_set[static_cast<std::size_t>(k)]) {
      repeated.push_back(k);
      tail += std::pow(result.eigenvalues(k), 2 * tau);
    }
  }

  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  const auto total = static_cast<std::size_t>(m) * static_cast<std::size_t>(m - 1) / 2;
  if (sample_pairs >= total) {
    pairs.reserve(total);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
    }
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, m - 1);
    pairs.reserve(sample_pairs);
    while (pairs.size() < sample_pairs) {
      const Eigen::Index i = pick(rng);
      const Eigen::Index j = pick(rng);
      if (i != j) pairs.emplace_back(i, j);
    }
  }

  struct PairTerms {
    double reduced;
    double full;
    double repeated_norm;
  };
  std::vector<PairTerms> terms;
  terms.reserve(pairs.size());
  EquivalenceReport report;
  for (const auto& [i, j] : pairs) {
    PairTerms t{0.0, 0.0, 0.0};
    for (int k = 1; k < big_k; ++k) {
      const double diff = result.eigenvectors(i, k) - result.eigenvectors(j, k);
      const double weighted = std::pow(result.eigenvalues(k), 2 * tau) * diff * diff;
      t.full += weighted;
      if (in_set[static_cast<std::size_t>(k)]) {
        t.reduced += weighted;
      } else {
        t.repeated_norm += diff * diff;
      }
    }
    t.repeated_norm = std::sqrt(t.repeated_norm);
    if (t.reduced > 0.0) {
      report.k_est = std::max(report.k_est, t.repeated_norm / std::sqrt(t.reduced));
    } else if (t.repeated_norm > 0.0) {
      ++report.lipschitz_violations;
    }
    terms.push_back(t);
  }

  const double factor = 1.0 + report.k_est * report.k_est * tail;
  report.worst_slack = std::numeric_limits<double>::infinity();
  for (const PairTerms& t : terms) {
    report.worst_slack = std::min(report.worst_slack, t.full - t.reduced);
    report.worst_slack = std::min(report.worst_slack, factor * t.reduced - t.full);
  }
  if (terms.empty()) report.worst_slack = 0.0;
  report.pairs_checked = terms.size();
  report.holds = report.worst_slack >= -kEquivalenceSlack && report.lipschitz_violations == 0;
  return report;
}

}  // namespace dmaps
