#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <json.hpp>

#include "dmaps/error.hpp"
#include "dmaps/pipeline.hpp"

using namespace dmaps;

namespace {

PipelineConfig strip_config() {
  PipelineConfig c;
  c.epsilon_rule = EpsilonRule::Fixed;
  c.epsilon_value = 0.5;
  c.num_eigen = 8;
  c.equivalence_pairs = 2000;
  return c;
}

Dataset permuted(const Dataset& d, const std::vector<Eigen::Index>& order) {
  RowMatrix x(d.observations.rows(), d.observations.dims());
  Eigen::MatrixXd lat(d.latent.rows(), d.latent.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = d.observations.vectors().row(order[i]);
    lat.row(static_cast<Eigen::Index>(i)) = d.latent.row(order[i]);
  }
  return Dataset{ObservationSet(std::move(x), d.observations.kind()), std::move(lat), d.latent_names, d.metadata};
}

}  // namespace

TEST_CASE("analyze on a small strip") {
  const Dataset d = sample_strip({4.0, 1.0, 300, StripDensity::Uniform, 1});
  const AnalysisReport r = analyze(d, strip_config());
  CHECK(r.epsilon == 0.5);
  CHECK(r.result.num_components() == 8);
  CHECK(r.residuals.residuals.size() == 7);
  CHECK(r.residuals.unique_indices.front() == 1);
  CHECK(r.equivalence.holds);
  REQUIRE(r.correlations.has_value());
  CHECK(r.correlations->variable_a == "z1");
  CHECK(r.correlations->variable_b == "z2");
  CHECK(r.dataset_hash == dataset_hash(d));
  REQUIRE(r.dimensionality_ratio.has_value());
  REQUIRE(r.length_ratio().has_value());
  CHECK(*r.length_ratio() == doctest::Approx(1.0 / *r.dimensionality_ratio));

  const auto j = report_json(r);
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["distance_units"] == "ambient");
  CHECK_FALSE(j["provenance"]["config_hash"].get<std::string>().empty());
  CHECK(j["spectrum"].size() == 8);
  CHECK(j.dump() == report_json(analyze(d, strip_config())).dump());

  const CsvTable full = embedding_table(r, false);
  const CsvTable reduced = embedding_table(r, true);
  CHECK(full.header.size() == 8);
  CHECK(reduced.header.size() == r.residuals.unique_indices.size() + 1);
  CHECK(full.rows.size() == 300);
  const CsvTable spec = spectrum_table(r);
  CHECK(spec.rows.size() == 8);
  CHECK(spec.rows[0][2].empty());
  CHECK(spec.rows[1][3] == "1");

  const std::string text = format_report(nlohmann::json::parse(j.dump()));
  CHECK(text.find("unique indices: 1") != std::string::npos);
}

TEST_CASE("row order does not change the selection") {
  const Dataset d = sample_strip({4.0, 1.0, 250, StripDensity::Uniform, 2});
  std::vector<Eigen::Index> order(250);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(3));
  const AnalysisReport a = analyze(d, strip_config());
  const AnalysisReport b = analyze(permuted(d, order), strip_config());
  CHECK(a.residuals.unique_indices == b.residuals.unique_indices);
  for (std::size_t k = 0; k < a.residuals.residuals.size(); ++k) {
    CHECK(a.residuals.residuals[k] == doctest::Approx(b.residuals.residuals[k]).epsilon(1e-6));
  }
  REQUIRE(a.correlations.has_value());
  REQUIRE(b.correlations.has_value());
  CHECK(a.correlations->report.corr_p == doctest::Approx(b.correlations->report.corr_p).epsilon(1e-8));
  CHECK(a.correlations->report.corr_t == doctest::Approx(b.correlations->report.corr_t).epsilon(1e-8));
}

TEST_CASE("configuration errors") {
  const Dataset d = sample_strip({4.0, 1.0, 30, StripDensity::Uniform, 4});
  PipelineConfig c = strip_config();
  c.metric = Metric::EMD;
  CHECK_THROWS_AS(analyze(d, c), ConfigError);
  c = strip_config();
  c.alpha = 2.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = strip_config();
  c.num_eigen = 2;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = strip_config();
  c.selection = TopD{8};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = strip_config();
  c.num_eigen = 31;
  CHECK_THROWS_AS(analyze(d, c), ConfigError);
  c = strip_config();
  c.epsilon_rule = EpsilonRule::Fixed;
  c.epsilon_value = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("report schema checks") {
  nlohmann::json j = {{"schema_version", 99}};
  try {
    check_report_schema(j);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("99") != std::string::npos);
    CHECK(msg.find(std::to_string(kReportSchemaVersion)) != std::string::npos);
  }
  CHECK_THROWS_AS(check_report_schema(nlohmann::json::object()), ConfigError);
}

TEST_CASE("reports without latent variables print n/a") {
  const Dataset d = sample_strip({4.0, 1.0, 120, StripDensity::Uniform, 5});
  const Dataset bare{d.observations, Eigen::MatrixXd(120, 0), {}, {}};
  const AnalysisReport r = analyze(bare, strip_config());
  CHECK_FALSE(r.correlations.has_value());
  const auto j = report_json(r);
  CHECK(j["correlations"].is_null());
  CHECK(format_report(nlohmann::json::parse(j.dump())).find("correlations: n/a") != std::string::npos);
}

TEST_CASE("chemotaxis reports use bin units") {
  EnsembleConfig ec;
  ec.base.n_cells = 300;
  ec.base.seed = 6;
  const Dataset d = to_dataset(build_ensemble(ec));
  PipelineConfig c;
  c.metric = Metric::EMD;
  c.num_eigen = 10;
  const AnalysisReport r = analyze(d, c);
  CHECK(r.epsilon == r.median_distance);
  CHECK(report_json(r)["distance_units"] == "bins");
  REQUIRE(r.correlations.has_value());
  CHECK(r.correlations->variable_a == "p");
  CHECK(r.correlations->variable_b == "t");
}

TEST_CASE("presets") {
  for (const char* name : {"strip-l4", "swissroll-h40", "torus-r10", "chemotaxis-l1", "chemotaxis-l1-euclidean"}) {
    const Preset& p = find_preset(name);
    CHECK(p.name == name);
    CHECK_NOTHROW(validate(p.config));
  }
  CHECK(find_preset("chemotaxis-l400").config.metric == Metric::EMD);
  CHECK(find_preset("chemotaxis-l400-euclidean").config.metric == Metric::Euclidean);
  CHECK_THROWS_AS(find_preset("nope"), ConfigError);
  const SweepConfig s = sweep_preset();
  CHECK(s.replicates == 3);
  CHECK(s.lambdas.size() * s.t_obs_values.size() >= 16);
}

TEST_CASE("sweep tables") {
  SweepConfig sc;
  sc.lambdas = {1.0, 10.0};
  sc.t_obs_values = {1e-2};
  sc.replicates = 1;
  sc.n_cells = 200;
  sc.seed = 7;
  const SweepGrid g = dimensionality_sweep(sc);
  const CsvTable t = sweep_table(g);
  CHECK(t.header == std::vector<std::string>{"lambda", "t_obs", "mean_ratio", "warn"});
  CHECK(t.rows.size() == 2);
  CHECK(boundary_table(g).rows.size() == 2);
  const auto j = sweep_json(g, sc);
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["boundary"]["t_obs"][1].get<double>() == doctest::Approx(0.1));
}
