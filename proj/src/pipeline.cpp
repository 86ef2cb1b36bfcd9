#include "dmaps/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dmaps/diagnostics.hpp"
#include "dmaps/error.hpp"

namespace dmaps {
namespace {

const char* metric_name(Metric m) { return m == Metric::EMD ? "emd" : "euclidean"; }

const char* epsilon_rule_name(EpsilonRule r) {
  switch (r) {
    case EpsilonRule::Median:
      return "median";
    case EpsilonRule::Fixed:
      return "fixed";
    case EpsilonRule::MedianFraction:
      return "median_fraction";
  }
  return "median";
}

nlohmann::ordered_json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int latent_column(const Dataset& ds, const std::string& name) {
  for (std::size_t c = 0; c < ds.latent_names.size(); ++c) {
    if (ds.latent_names[c] == name) return static_cast<int>(c);
  }
  return -1;
}

}  // namespace

void validate(const PipelineConfig& c) {
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (c.epsilon_rule != EpsilonRule::Median && !(c.epsilon_value > 0.0 && std::isfinite(c.epsilon_value))) {
    throw ConfigError("epsilon value must be positive");
  }
  if (c.num_eigen < 3) throw ConfigError("num_eigen must be at least 3");
  if (c.tau < 0) throw ConfigError("tau must be nonnegative");
  if (const auto* t = std::get_if<Threshold>(&c.selection)) {
    if (!std::isfinite(t->value)) throw ConfigError("threshold must be finite");
  } else if (std::get<TopD>(c.selection).count < 1) {
    throw ConfigError("top-d count must be at least 1");
  } else if (std::get<TopD>(c.selection).count > c.num_eigen - 1) {
    throw ConfigError("top-d count exceeds num_eigen - 1");
  }
}

nlohmann::ordered_json config_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["metric"] = metric_name(c.metric);
  j["alpha"] = c.alpha;
  j["epsilon_rule"] = epsilon_rule_name(c.epsilon_rule);
  j["epsilon_value"] = c.epsilon_rule == EpsilonRule::Median ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(c.epsilon_value);
  j["num_eigen"] = c.num_eigen;
  j["tau"] = c.tau;
  if (const auto* t = std::get_if<Threshold>(&c.selection)) {
    j["selection"] = {{"kind", "threshold"}, {"value", t->value}};
  } else {
    j["selection"] = {{"kind", "top_d"}, {"value", std::get<TopD>(c.selection).count}};
  }
  j["loocv"] = c.loocv == LoocvMethod::Literal ? "literal" : "smoother";
  j["equivalence_pairs"] = c.equivalence_pairs;
  j["seed"] = c.seed;
  return j;
}

std::optional<double> AnalysisReport::length_ratio() const {
  if (!dimensionality_ratio || !(*dimensionality_ratio > 0.0)) return std::nullopt;
  return 1.0 / *dimensionality_ratio;
}

AnalysisReport analyze(const Dataset& dataset, const PipelineConfig& config) {
  validate(config);
  const ObservationSet& obs = dataset.observations;
  if (config.metric == Metric::EMD && obs.kind() != ObservationKind::Histograms) {
    throw ConfigError("metric emd requires histogram observations; dataset holds raw points");
  }
  if (config.num_eigen > obs.rows()) throw ConfigError("num_eigen exceeds the number of observations");

  WarningCapture capture;
  AnalysisReport report;
  report.config = config;
  report.config_hash = fnv1a_hex(config_json(config).dump());
  report.dataset_hash = dataset_hash(dataset);

  const DistanceMatrix d = pairwise_distances(obs, config.metric);
  report.median_distance = median_pairwise(d);
  switch (config.epsilon_rule) {
    case EpsilonRule::Median:
      report.epsilon = report.median_distance;
      break;
    case EpsilonRule::Fixed:
      report.epsilon = config.epsilon_value;
      break;
    case EpsilonRule::MedianFraction:
      report.epsilon = config.epsilon_value * report.median_distance;
      break;
  }
  const MarkovMatrix a = build_markov(d, report.epsilon, config.alpha);
  report.result = eigendecompose(a, config.num_eigen);
  report.result.tau = config.tau;
  report.residuals = score_all(report.result, config.selection, config.loocv);
  report.pair = unique_pair(report.residuals);
  if (report.pair.fallback) warn("fewer than two unique directions; pair taken from the two largest residuals");

  const std::vector<int>& unique = report.residuals.unique_indices;
  if (!unique.empty()) {
    try {
      report.relative_lengths = relative_lengths(report.result, unique);
    } catch (const InvalidParameter& e) {
      warn(std::string("relative lengths unavailable: ") + e.what());
    }
  }
  try {
    report.dimensionality_ratio = dimensionality_ratio(report.result.eigenvalues(report.pair.first),
                                                       report.result.eigenvalues(report.pair.second));
  } catch (const InvalidParameter& e) {
    warn(std::string("dimensionality ratio unavailable: ") + e.what());
  }

  int col_a = latent_column(dataset, "p");
  int col_b = latent_column(dataset, "t");
  if (col_a < 0 || col_b < 0) {
    col_a = dataset.latent.cols() >= 2 ? 0 : -1;
    col_b = dataset.latent.cols() >= 2 ? 1 : -1;
  }
  if (col_a >= 0) {
    const std::vector<int> pair = {report.pair.first, report.pair.second};
    const Embedding emb = embed(report.result, pair, config.tau);
    try {
      report.correlations = CorrelationSummary{
          dataset.latent_names[static_cast<std::size_t>(col_a)], dataset.latent_names[static_cast<std::size_t>(col_b)],
          correlation_report(emb.coords, dataset.latent.col(col_a), dataset.latent.col(col_b))};
    } catch (const InvalidData& e) {
      warn(std::string("correlations unavailable: ") + e.what());
    }
  }

  report.equivalence = equivalence_check(report.result, unique.empty() ? std::vector<int>{1} : unique, config.tau,
                                         config.equivalence_pairs, config.seed);
  report.warnings = capture.messages();
  return report;
}

nlohmann::ordered_json report_json(const AnalysisReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["provenance"] = {{"config_hash", r.config_hash}, {"dataset_hash", r.dataset_hash}, {"seed", r.config.seed}};
  j["config"] = config_json(r.config);
  j["distance_units"] = r.config.metric == Metric::EMD ? "bins" : "ambient";
  j["median_distance"] = r.median_distance;
  j["epsilon"] = r.epsilon;
  j["m"] = r.result.num_points();
  j["spectrum"] = std::vector<double>(r.result.eigenvalues.data(),
                                      r.result.eigenvalues.data() + r.result.eigenvalues.size());
  const double threshold = r.residuals.threshold();
  j["residuals"] = {{"residuals", r.residuals.residuals},
                    {"unique_indices", r.residuals.unique_indices},
                    {"threshold", number_or_null(threshold)},
                    {"eps_reg_used", r.residuals.eps_reg_used}};
  j["relative_lengths"] = r.relative_lengths;
  j["dimensionality"] = {{"pair", {r.pair.first, r.pair.second}},
                         {"fallback", r.pair.fallback},
                         {"ratio", number_or_null(r.dimensionality_ratio)},
                         {"length_ratio", number_or_null(r.length_ratio())}};
  if (r.correlations) {
    const auto& c = *r.correlations;
    j["correlations"] = {{"variables", {c.variable_a, c.variable_b}},
                         {"abs_corr", {c.report.corr_p, c.report.corr_t}},
                         {"pair_columns", {c.report.column_p, c.report.column_t}}};
  } else {
    j["correlations"] = nullptr;
  }
  j["equivalence"] = {{"holds", r.equivalence.holds},
                      {"worst_slack", r.equivalence.worst_slack},
                      {"k_est", r.equivalence.k_est},
                      {"pairs_checked", r.equivalence.pairs_checked},
                      {"lipschitz_violations", r.equivalence.lipschitz_violations}};
  j["warnings"] = r.warnings;
  return j;
}

void check_report_schema(const nlohmann::json& report) {
  if (!report.is_object() || !report.contains("schema_version") || !report["schema_version"].is_number_integer()) {
    throw ConfigError("report has no schema_version (expected " + std::to_string(kReportSchemaVersion) + ")");
  }
  const int found = report["schema_version"].get<int>();
  if (found != kReportSchemaVersion) {
    throw ConfigError("unsupported report schema_version " + std::to_string(found) + " (expected " +
                      std::to_string(kReportSchemaVersion) + ")");
  }
}

std::string format_report(const nlohmann::json& j) {
  check_report_schema(j);
  std::ostringstream out;
  const auto& spectrum = j.at("spectrum");
  const auto& res = j.at("residuals").at("residuals");
  out << "observations: " << j.value("m", 0) << "   epsilon: " << fixed(j.value("epsilon", NAN), 6) << " ("
      << j.value("distance_units", "") << ")\n";
  out << "   k          mu_k     r_k\n";
  for (std::size_t k = 1; k < spectrum.size(); ++k) {
    char line[96];
    const double r = k - 1 < res.size() ? res[k - 1].get<double>() : NAN;
    std::snprintf(line, sizeof line, "%4zu  %12.6f  %6s\n", k, spectrum[k].get<double>(), fixed(r, 3).c_str());
    out << line;
  }
  const auto& unique = j.at("residuals").at("unique_indices");
  out << "unique indices:";
  for (const auto& k : unique) out << ' ' << k.get<int>();
  out << "\ndetected dimensionality: " << unique.size() << '\n';
  const auto& dim = j.at("dimensionality");
  out << "pair: " << dim.at("pair")[0].get<int>() << ", " << dim.at("pair")[1].get<int>()
      << (dim.value("fallback", false) ? " (two largest residuals)" : "") << '\n';
  auto num = [](const nlohmann::json& v) { return v.is_number() ? fixed(v.get<double>(), 4) : std::string("n/a"); };
  out << "dimensionality ratio: " << num(dim.at("ratio")) << "   length ratio: " << num(dim.at("length_ratio"))
      << '\n';
  out << "relative lengths:";
  if (j.at("relative_lengths").empty()) out << " n/a";
  for (const auto& l : j.at("relative_lengths")) out << ' ' << fixed(l.get<double>(), 4);
  out << '\n';
  const auto& corr = j.at("correlations");
  if (corr.is_null()) {
    out << "correlations: n/a\n";
  } else {
    out << "correlations: |corr(" << corr.at("variables")[0].get<std::string>() << ")| = " << num(corr.at("abs_corr")[0])
        << "   |corr(" << corr.at("variables")[1].get<std::string>() << ")| = " << num(corr.at("abs_corr")[1]) << '\n';
  }
  const auto& eq = j.at("equivalence");
  out << "equivalence bound: " << (eq.value("holds", false) ? "holds" : "violated")
      << "   K_est = " << num(eq.at("k_est")) << '\n';
  for (const auto& w : j.value("warnings", nlohmann::json::array())) out << "warning: " << w.get<std::string>() << '\n';
  return out.str();
}

CsvTable embedding_table(const AnalysisReport& report, bool reduced) {
  std::vector<int> indices = reduced ? report.residuals.unique_indices : nontrivial_indices(report.result);
  CsvTable table;
  if (indices.empty()) {
    table.header = {"row"};
  } else {
    const Embedding emb = embed(report.result, indices, report.config.tau);
    table.header.push_back("row");
    for (const int k : indices) table.header.push_back("phi" + std::to_string(k));
    for (Eigen::Index i = 0; i < emb.coords.rows(); ++i) {
      std::vector<std::string> row{std::to_string(i)};
      for (Eigen::Index c = 0; c < emb.coords.cols(); ++c) row.push_back(format_double(emb.coords(i, c)));
      table.rows.push_back(std::move(row));
    }
    return table;
  }
  for (Eigen::Index i = 0; i < report.result.num_points(); ++i) table.rows.push_back({std::to_string(i)});
  return table;
}

CsvTable spectrum_table(const AnalysisReport& report) {
  CsvTable table{{"k", "mu", "r", "unique"}, {}};
  const auto& unique = report.residuals.unique_indices;
  for (int k = 0; k < report.result.num_components(); ++k) {
    const bool is_unique = std::find(unique.begin(), unique.end(), k) != unique.end();
    table.rows.push_back({std::to_string(k), format_double(report.result.eigenvalues(k)),
                          k == 0 ? std::string() : format_double(report.residuals.r(k)), is_unique ? "1" : "0"});
  }
  return table;
}

nlohmann::ordered_json sweep_json(const SweepGrid& grid, const SweepConfig& config) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  nlohmann::ordered_json cfg;
  cfg["lambdas"] = config.lambdas;
  cfg["t_obs"] = config.t_obs_values;
  cfg["replicates"] = config.replicates;
  cfg["n_cells"] = config.n_cells;
  cfg["runs"] = config.runs;
  cfg["snapshots"] = config.snapshots;
  cfg["num_eigen"] = config.num_eigen;
  cfg["alpha"] = config.alpha;
  cfg["seed"] = config.seed;
  j["provenance"] = {{"config_hash", fnv1a_hex(cfg.dump())}, {"seed", config.seed}};
  j["config"] = cfg;
  j["lambdas"] = grid.lambdas;
  j["t_obs"] = grid.t_obs_values;
  nlohmann::ordered_json ratios = nlohmann::ordered_json::array();
  nlohmann::ordered_json warns = nlohmann::ordered_json::array();
  nlohmann::ordered_json messages = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < grid.lambdas.size(); ++i) {
    nlohmann::ordered_json rrow = nlohmann::ordered_json::array();
    nlohmann::ordered_json wrow = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < grid.t_obs_values.size(); ++k) {
      const SweepCell& c = grid.at(i, k);
      rrow.push_back(number_or_null(c.mean_ratio));
      wrow.push_back(c.warn);
      for (const auto& msg : c.messages) {
        messages.push_back({{"lambda", c.lambda}, {"t_obs", c.t_obs}, {"message", msg}});
      }
    }
    ratios.push_back(rrow);
    warns.push_back(wrow);
  }
  j["mean_ratio"] = ratios;
  j["warn"] = warns;
  j["messages"] = messages;
  j["boundary"] = {{"lambda", grid.lambdas}, {"t_obs", grid.boundary_t_obs}};
  return j;
}

CsvTable sweep_table(const SweepGrid& grid) {
  CsvTable table{{"lambda", "t_obs", "mean_ratio", "warn"}, {}};
  for (const SweepCell& c : grid.cells) {
    table.rows.push_back({format_double(c.lambda), format_double(c.t_obs), format_double(c.mean_ratio),
                          c.warn ? "1" : "0"});
  }
  return table;
}

CsvTable boundary_table(const SweepGrid& grid) {
  CsvTable table{{"lambda", "t_obs"}, {}};
  for (std::size_t i = 0; i < grid.lambdas.size(); ++i) {
    table.rows.push_back({format_double(grid.lambdas[i]), format_double(grid.boundary_t_obs[i])});
  }
  return table;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> list = [] {
    std::vector<Preset> p;
    auto strip = [](double l1, StripDensity density) {
      return [l1, density](std::uint64_t seed) { return sample_strip({l1, 1.0, 2000, density, seed}); };
    };
    PipelineConfig strip_cfg;
    strip_cfg.epsilon_rule = EpsilonRule::Fixed;
    strip_cfg.epsilon_value = 0.2;
    p.push_back({"strip-l2", "strip L1=2, L2=1, m=2000, uniform", strip(2.0, StripDensity::Uniform), strip_cfg});
    p.push_back({"strip-l4", "strip L1=4, L2=1, m=2000, uniform", strip(4.0, StripDensity::Uniform), strip_cfg});
    p.push_back({"strip-l8", "strip L1=8, L2=1, m=2000, uniform", strip(8.0, StripDensity::Uniform), strip_cfg});
    p.push_back({"strip-l4-gaussian", "strip L1=4, L2=1, m=2000, Gaussian in z1",
                 strip(4.0, StripDensity::GaussianInZ1), strip_cfg});

    PipelineConfig roll_cfg;
    roll_cfg.epsilon_rule = EpsilonRule::Fixed;
    roll_cfg.epsilon_value = 2.0;
    for (const double h : {40.0, 20.0}) {
      p.push_back({"swissroll-h" + std::to_string(static_cast<int>(h)),
                   "Swiss roll h=" + std::to_string(static_cast<int>(h)) + ", m=1500",
                   [h](std::uint64_t seed) {
                     return sample_swiss_roll(h, 1500, kSwissRollThetaMin, kSwissRollThetaMax, seed);
                   },
                   roll_cfg});
    }

    PipelineConfig torus_cfg;
    torus_cfg.epsilon_rule = EpsilonRule::MedianFraction;
    torus_cfg.epsilon_value = 1.0 / 3.0;
    for (const double r1 : {3.0, 5.0, 10.0}) {
      p.push_back({"torus-r" + std::to_string(static_cast<int>(r1)),
                   "torus r1=" + std::to_string(static_cast<int>(r1)) + ", r2=1, m=3000",
                   [r1](std::uint64_t seed) { return sample_torus(r1, 1.0, 3000, seed); }, torus_cfg});
    }

    PipelineConfig chem_cfg;
    chem_cfg.metric = Metric::EMD;
    chem_cfg.num_eigen = 10;
    auto chem = [](double lambda, double speed) {
      return [lambda, speed](std::uint64_t seed) {
        EnsembleConfig ec;
        ec.base.switch_rate = lambda;
        ec.base.speed = speed;
        ec.base.seed = seed;
        return to_dataset(build_ensemble(ec));
      };
    };
    const std::vector<std::pair<double, double>> chem_params = {
        {1.0, 1.0}, {100.0, 10.0}, {400.0, 20.0}, {1600.0, 40.0}, {6400.0, 80.0}};
    for (const auto& [lambda, speed] : chem_params) {
      const std::string tag = std::to_string(static_cast<int>(lambda));
      p.push_back({"chemotaxis-l" + tag,
                   "velocity jump, lambda=" + tag + ", s=" + std::to_string(static_cast<int>(speed)) +
                       ", N=1000, 10 runs, t_max=10, dt=1, EMD",
                   chem(lambda, speed), chem_cfg});
      PipelineConfig euclid = chem_cfg;
      euclid.metric = Metric::Euclidean;
      p.push_back({"chemotaxis-l" + tag + "-euclidean", "as chemotaxis-l" + tag + " with Euclidean distances",
                   chem(lambda, speed), euclid});
    }
    return p;
  }();
  return list;
}

const Preset& find_preset(const std::string& name) {
  for (const Preset& p : presets()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const Preset& p : presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

SweepConfig sweep_preset() {
  SweepConfig c;
  c.lambdas = {0.1, 1.0, 10.0, 100.0};
  c.t_obs_values = {1e-3, 1e-2, 1e-1, 1.0};
  c.replicates = 3;
  c.n_cells = 1000;
  return c;
}

}  // namespace dmaps
