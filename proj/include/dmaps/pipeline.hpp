#pragma once

// End-to-end analysis: distances, Markov matrix, spectrum, residual scoring,
// reduced embedding and the derived summaries, plus named presets.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmaps/chemotaxis.hpp"
#include "dmaps/io.hpp"
#include "dmaps/manifolds.hpp"
#include "dmaps/selection.hpp"
#include "dmaps/spectral.hpp"

namespace dmaps {

inline constexpr int kReportSchemaVersion = 1;

/// Median: eps = median pairwise distance. Fixed: eps = value.
/// MedianFraction: eps = value * median.
enum class EpsilonRule { Median, Fixed, MedianFraction };

struct PipelineConfig {
  Metric metric = Metric::Euclidean;
  double alpha = 1.0;
  EpsilonRule epsilon_rule = EpsilonRule::Median;
  double epsilon_value = 1.0;
  int num_eigen = 20;
  int tau = 0;
  SelectionCriterion selection = Threshold{0.5};
  LoocvMethod loocv = LoocvMethod::Literal;
  std::size_t equivalence_pairs = 10000;
  std::uint64_t seed = 0;
};

/// Throws ConfigError naming the offending field.
void validate(const PipelineConfig& config);

nlohmann::ordered_json config_json(const PipelineConfig& config);

struct CorrelationSummary {
  std::string variable_a;
  std::string variable_b;
  CorrelationReport report;
};

struct AnalysisReport {
  PipelineConfig config;
  double epsilon = 0.0;
  double median_distance = 0.0;
  DiffusionResult result;
  ResidualReport residuals;
  std::vector<double> relative_lengths;
  UniquePair pair;
  std::optional<double> dimensionality_ratio;
  std::optional<CorrelationSummary> correlations;
  EquivalenceReport equivalence;
  std::string config_hash;
  std::string dataset_hash;
  std::vector<std::string> warnings;

  /// L_{first} / L_{second} of the unique pair (1 / dimensionality ratio).
  std::optional<double> length_ratio() const;
};

/// Runs the full pipeline. Throws ConfigError for EMD on raw points and
/// propagates module errors. Warnings raised along the way are collected in
/// the report rather than printed.
AnalysisReport analyze(const Dataset& dataset, const PipelineConfig& config);

nlohmann::ordered_json report_json(const AnalysisReport& report);

/// Throws ConfigError when schema_version is missing or differs, naming both
/// versions.
void check_report_schema(const nlohmann::json& report);

/// Human-readable summary of a report JSON document.
std::string format_report(const nlohmann::json& report);

/// Full and reduced diffusion coordinates, one row per observation.
CsvTable embedding_table(const AnalysisReport& report, bool reduced);
/// k, mu_k, r_k rows for k = 0..K-1 (r empty for k = 0).
CsvTable spectrum_table(const AnalysisReport& report);

nlohmann::ordered_json sweep_json(const SweepGrid& grid, const SweepConfig& config);
CsvTable sweep_table(const SweepGrid& grid);
CsvTable boundary_table(const SweepGrid& grid);

struct Preset {
  std::string name;
  std::string description;
  std::function<Dataset(std::uint64_t seed)> generate;
  PipelineConfig config;
};

const std::vector<Preset>& presets();
/// Throws ConfigError listing the known names.
const Preset& find_preset(const std::string& name);

/// Desk-scale 4 x 4 sweep grid.
SweepConfig sweep_preset();

}  // namespace dmaps
