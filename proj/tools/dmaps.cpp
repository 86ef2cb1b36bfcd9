// dmaps: generate datasets, run the diffusion-maps pipeline, sweep the
// chemotaxis parameter grid and print reports.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dmaps/chemotaxis.hpp"
#include "dmaps/error.hpp"
#include "dmaps/io.hpp"
#include "dmaps/manifolds.hpp"
#include "dmaps/parallel.hpp"
#include "dmaps/pipeline.hpp"

namespace fs = std::filesystem;
using namespace dmaps;

namespace {

struct GenerateArgs {
  std::string preset;
  std::uint64_t seed = 0;
  std::string out;
  double l1 = 4.0;
  double l2 = 1.0;
  long m = 2000;
  std::string density = "uniform";
  double h = 40.0;
  double theta_min = kSwissRollThetaMin;
  double theta_max = kSwissRollThetaMax;
  double r1 = 10.0;
  double r2 = 1.0;
  double lambda = 1.0;
  double speed = 1.0;
  double tmax = 10.0;
  double dt = 1.0;
  long cells = 1000;
  int runs = 10;
  int bins = 32;
  bool random_p = false;
};

struct AnalyzeArgs {
  std::string dataset;
  std::string preset;
  std::string out = ".";
  std::string metric;
  std::string epsilon;
  double epsilon_fraction = 0.0;
  double alpha = -1.0;
  int k = 0;
  int tau = -1;
  double threshold = NAN;
  int top_d = 0;
  std::string loocv;
  long pairs = -1;
  std::uint64_t seed = 0;
};

struct SweepArgs {
  std::vector<double> lambdas;
  std::vector<double> t_obs;
  int replicates = 3;
  long cells = 1000;
  int k = 10;
  std::uint64_t seed = 0;
  std::string out = ".";
};

void write_json(const fs::path& path, const nlohmann::ordered_json& j) { write_text_file(path, j.dump(2) + "\n"); }

void run_generate(const std::string& kind, const GenerateArgs& a) {
  Dataset ds = [&]() -> Dataset {
    if (kind == "strip") {
      if (!(a.l2 > 0.0) || a.l1 < a.l2) throw ConfigError("--l1/--l2: need l1 >= l2 > 0");
      if (a.density != "uniform" && a.density != "gaussian") throw ConfigError("--density: expected uniform or gaussian");
      return sample_strip({a.l1, a.l2, a.m, a.density == "uniform" ? StripDensity::Uniform : StripDensity::GaussianInZ1,
                           a.seed});
    }
    if (kind == "swissroll") {
      if (!(a.theta_min > 0.0 && a.theta_min < a.theta_max)) {
        throw ConfigError("--theta-min/--theta-max: need 0 < theta-min < theta-max");
      }
      return sample_swiss_roll(a.h, a.m, a.theta_min, a.theta_max, a.seed);
    }
    if (kind == "torus") {
      if (!(a.r1 > a.r2)) throw ConfigError("--r1/--r2: need r1 > r2 > 0");
      return sample_torus(a.r1, a.r2, a.m, a.seed);
    }
    EnsembleConfig ec;
    ec.base.n_cells = a.cells;
    ec.base.speed = a.speed;
    ec.base.switch_rate = a.lambda;
    ec.base.t_max = a.tmax;
    ec.base.dt = a.dt;
    ec.base.seed = a.seed;
    ec.runs = a.runs;
    ec.bins = a.bins;
    ec.random_p = a.random_p;
    if (a.dt > a.tmax) throw ConfigError("--dt: must not exceed --tmax");
    const double steps = a.tmax / a.dt;
    if (std::fabs(steps - std::round(steps)) > 1e-9 * std::round(steps)) {
      throw ConfigError("--tmax/--dt: tmax / dt must be an integer");
    }
    Dataset d = to_dataset(build_ensemble(ec));
    d.metadata.insert(d.metadata.begin(), {{"lambda", format_double(a.lambda)},
                                           {"speed", format_double(a.speed)},
                                           {"t_max", format_double(a.tmax)},
                                           {"dt", format_double(a.dt)},
                                           {"n_cells", std::to_string(a.cells)},
                                           {"runs", std::to_string(a.runs)},
                                           {"p_values", a.random_p ? "random_uniform" : "spaced"},
                                           {"seed", std::to_string(a.seed)}});
    return d;
  }();
  save_dataset(a.out, ds, a.seed);
  std::cout << "wrote " << a.out << " (" << ds.observations.rows() << " rows) and " << a.out << ".json\n";
}

void run_generate_preset(const GenerateArgs& a) {
  const Preset& p = find_preset(a.preset);
  Dataset ds = p.generate(a.seed);
  ds.metadata.insert(ds.metadata.begin(), {"preset", p.name});
  save_dataset(a.out, ds, a.seed);
  std::cout << "wrote " << a.out << " (" << ds.observations.rows() << " rows, preset " << p.name << ")\n";
}

PipelineConfig analyze_config(const AnalyzeArgs& a) {
  PipelineConfig c = a.preset.empty() ? PipelineConfig{} : find_preset(a.preset).config;
  if (!a.metric.empty()) {
    if (a.metric == "emd") {
      c.metric = Metric::EMD;
    } else if (a.metric == "euclidean") {
      c.metric = Metric::Euclidean;
    } else {
      throw ConfigError("--metric: expected emd or euclidean, got '" + a.metric + "'");
    }
  }
  if (!a.epsilon.empty()) {
    if (a.epsilon == "median") {
      c.epsilon_rule = EpsilonRule::Median;
    } else {
      try {
        std::size_t used = 0;
        c.epsilon_value = std::stod(a.epsilon, &used);
        if (used != a.epsilon.size() || !(c.epsilon_value > 0.0)) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ConfigError("--epsilon: expected 'median' or a positive number, got '" + a.epsilon + "'");
      }
      c.epsilon_rule = EpsilonRule::Fixed;
    }
  }
  if (a.epsilon_fraction > 0.0) {
    c.epsilon_rule = EpsilonRule::MedianFraction;
    c.epsilon_value = a.epsilon_fraction;
  }
  if (a.alpha >= 0.0) c.alpha = a.alpha;
  if (a.k > 0) c.num_eigen = a.k;
  if (a.tau >= 0) c.tau = a.tau;
  if (!std::isnan(a.threshold)) c.selection = Threshold{a.threshold};
  if (a.top_d > 0) c.selection = TopD{a.top_d};
  if (!a.loocv.empty()) {
    if (a.loocv != "literal" && a.loocv != "smoother") throw ConfigError("--loocv: expected literal or smoother");
    c.loocv = a.loocv == "literal" ? LoocvMethod::Literal : LoocvMethod::Smoother;
  }
  if (a.pairs >= 0) c.equivalence_pairs = static_cast<std::size_t>(a.pairs);
  c.seed = a.seed;
  if (const auto* d = std::get_if<TopD>(&c.selection); d && d->count > c.num_eigen - 1) {
    throw ConfigError("--top-d: must not exceed --k - 1");
  }
  validate(c);
  return c;
}

void run_analyze(const AnalyzeArgs& a) {
  const PipelineConfig config = analyze_config(a);
  const Dataset ds = load_dataset(a.dataset);
  const AnalysisReport report = analyze(ds, config);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_json(dir / "report.json", report_json(report));
  write_csv_file(dir / "embedding_full.csv", embedding_table(report, false));
  write_csv_file(dir / "embedding_reduced.csv", embedding_table(report, true));
  write_csv_file(dir / "spectrum.csv", spectrum_table(report));
  std::cout << format_report(nlohmann::json::parse(report_json(report).dump()));
  std::cout << "wrote " << (dir / "report.json").string() << '\n';
}

void run_sweep(const SweepArgs& a) {
  SweepConfig c = sweep_preset();
  if (!a.lambdas.empty()) c.lambdas = a.lambdas;
  if (!a.t_obs.empty()) c.t_obs_values = a.t_obs;
  c.replicates = a.replicates;
  c.n_cells = a.cells;
  c.num_eigen = a.k;
  c.seed = a.seed;
  const SweepGrid grid = dimensionality_sweep(c);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_json(dir / "sweep.json", sweep_json(grid, c));
  write_csv_file(dir / "sweep.csv", sweep_table(grid));
  write_csv_file(dir / "boundary.csv", boundary_table(grid));
  std::cout << "mean eigenvalue ratio (rows: lambda, columns: t_obs)\n          ";
  for (const double t : grid.t_obs_values) std::printf("%10.3g", t);
  std::cout << '\n';
  for (std::size_t i = 0; i < grid.lambdas.size(); ++i) {
    std::printf("%10.3g", grid.lambdas[i]);
    for (std::size_t j = 0; j < grid.t_obs_values.size(); ++j) {
      std::printf("%9.3f%s", grid.at(i, j).mean_ratio, grid.at(i, j).warn ? "*" : " ");
    }
    std::cout << '\n';
  }
  std::cout << "(* = at least one replicate used the two largest residuals)\nwrote " << (dir / "sweep.json").string()
            << '\n';
}

void run_report(const std::string& path) {
  const auto j = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw InvalidData(path + " is not valid JSON");
  std::cout << format_report(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion maps with automatic detection of repeated eigendirections"};
  app.require_subcommand(1);
  long threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: DMAPS_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a dataset CSV and its JSON metadata");
  generate->add_option("--preset", gen.preset, "Named preset (overrides the kind)");
  generate->add_option("--seed", gen.seed, "Random seed");
  generate->add_option("--out", gen.out, "Output CSV path")->required();
  generate->require_subcommand(0, 1);

  auto* strip = generate->add_subcommand("strip", "Rectangle [0,L1]x[0,L2]");
  strip->add_option("--l1", gen.l1, "Long edge")->check(CLI::PositiveNumber);
  strip->add_option("--l2", gen.l2, "Short edge")->check(CLI::PositiveNumber);
  strip->add_option("--m", gen.m, "Sample count")->check(CLI::Range(2L, 1000000L));
  strip->add_option("--density", gen.density, "uniform or gaussian (in z1)");
  auto* roll = generate->add_subcommand("swissroll", "Swiss roll, uniform in arclength");
  roll->add_option("--height", gen.h, "Roll height h")->check(CLI::PositiveNumber);
  roll->add_option("--m", gen.m, "Sample count")->check(CLI::Range(2L, 1000000L));
  roll->add_option("--theta-min", gen.theta_min, "Start angle")->check(CLI::PositiveNumber);
  roll->add_option("--theta-max", gen.theta_max, "End angle")->check(CLI::PositiveNumber);
  auto* torus = generate->add_subcommand("torus", "Torus with radii r1 > r2");
  torus->add_option("--r1", gen.r1, "Outer radius")->check(CLI::PositiveNumber);
  torus->add_option("--r2", gen.r2, "Inner radius")->check(CLI::PositiveNumber);
  torus->add_option("--m", gen.m, "Sample count")->check(CLI::Range(2L, 1000000L));
  auto* chem = generate->add_subcommand("chemotaxis", "Velocity-jump snapshot histograms");
  chem->add_option("--lambda", gen.lambda, "Switching rate")->check(CLI::NonNegativeNumber);
  chem->add_option("--speed", gen.speed, "Cell speed")->check(CLI::PositiveNumber);
  chem->add_option("--tmax", gen.tmax, "Simulated time")->check(CLI::PositiveNumber);
  chem->add_option("--dt", gen.dt, "Snapshot interval")->check(CLI::PositiveNumber);
  chem->add_option("--cells", gen.cells, "Cells per run")->check(CLI::Range(1L, 100000000L));
  chem->add_option("--runs", gen.runs, "Runs (one p each)")->check(CLI::Range(1, 100000));
  chem->add_option("--bins", gen.bins, "Histogram bins")->check(CLI::Range(1, 100000));
  chem->add_flag("--random-p", gen.random_p, "Draw p ~ U[0.1, 0.9] instead of spacing");

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Run the pipeline on a dataset CSV");
  analyze_cmd->add_option("dataset", an.dataset, "Dataset CSV")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--preset", an.preset, "Start from a preset's configuration");
  analyze_cmd->add_option("--out", an.out, "Output directory");
  analyze_cmd->add_option("--metric", an.metric, "euclidean or emd");
  analyze_cmd->add_option("--epsilon", an.epsilon, "'median' or a fixed kernel scale");
  analyze_cmd->add_option("--epsilon-fraction", an.epsilon_fraction, "Kernel scale as a fraction of the median")
      ->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--alpha", an.alpha, "Density normalization in [0, 1]")->check(CLI::Range(0.0, 1.0));
  analyze_cmd->add_option("--k", an.k, "Eigenpairs to compute")->check(CLI::Range(3, 100000));
  analyze_cmd->add_option("--tau", an.tau, "Diffusion time")->check(CLI::NonNegativeNumber);
  auto* thr = analyze_cmd->add_option("--threshold", an.threshold, "Select r_k > threshold (default 0.5)");
  analyze_cmd->add_option("--top-d", an.top_d, "Select the d largest residuals")
      ->check(CLI::PositiveNumber)
      ->excludes(thr);
  analyze_cmd->add_option("--loocv", an.loocv, "literal or smoother");
  analyze_cmd->add_option("--pairs", an.pairs, "Pairs sampled by the equivalence check")
      ->check(CLI::NonNegativeNumber);
  analyze_cmd->add_option("--seed", an.seed, "Seed for pair sampling");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Eigenvalue ratio over a (lambda, t_obs) grid");
  sweep->add_option("--lambdas", sw.lambdas, "Switching rates")->delimiter(',')->check(CLI::PositiveNumber);
  sweep->add_option("--tobs", sw.t_obs, "Observation time scales t_max/N")->delimiter(',')->check(CLI::PositiveNumber);
  sweep->add_option("--replicates", sw.replicates, "Replicates per cell")->check(CLI::Range(1, 1000));
  sweep->add_option("--cells", sw.cells, "Cells per run")->check(CLI::Range(1L, 100000000L));
  sweep->add_option("--k", sw.k, "Eigenpairs to compute")->check(CLI::Range(3, 1000));
  sweep->add_option("--seed", sw.seed, "Random seed");
  sweep->add_option("--out", sw.out, "Output directory");

  std::string report_path;
  auto* report = app.add_subcommand("report", "Print a report JSON as text");
  report->add_option("report", report_path, "report.json")->required()->check(CLI::ExistingFile);

  auto* list = app.add_subcommand("presets", "List named presets");

  for (auto* sub : {strip, roll, torus, chem}) sub->fallthrough();
  for (auto* sub : {generate, analyze_cmd, sweep, report, list}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_thread_count(static_cast<std::size_t>(threads));

  try {
    if (generate->parsed()) {
      if (!gen.preset.empty()) {
        run_generate_preset(gen);
      } else if (generate->get_subcommands().empty()) {
        throw ConfigError("generate: give a kind (strip, swissroll, torus, chemotaxis) or --preset");
      } else {
        run_generate(generate->get_subcommands().front()->get_name(), gen);
      }
    } else if (analyze_cmd->parsed()) {
      run_analyze(an);
    } else if (sweep->parsed()) {
      run_sweep(sw);
    } else if (report->parsed()) {
      run_report(report_path);
    } else if (list->parsed()) {
      for (const Preset& p : presets()) std::cout << p.name << "  " << p.description << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
