// Command-line front end: synthetic data generation, single pipeline fits,
// and the full scenario benchmark. All outputs are deterministic for a given
// command line, so reruns produce byte-identical files.

#include "fairml/fairml.hpp"
#include "fairml/json_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

using namespace fairml;

struct SolverArgs {
  double time_limit = 60.0;
  long long max_iters = 1000;
  double kkt_tol = 1e-6;
  double feas_tol = 1e-6;
};

void add_solver_options(CLI::App* cmd, SolverArgs& args) {
  cmd->add_option("--time-limit", args.time_limit, "solver wall-clock budget in seconds");
  cmd->add_option("--max-iters", args.max_iters, "solver iteration budget");
  cmd->add_option("--kkt-tol", args.kkt_tol, "solver stationarity tolerance");
  cmd->add_option("--feas-tol", args.feas_tol, "allowed constraint overshoot");
}

SolverOptions to_solver_options(const SolverArgs& args) {
  SolverOptions opts;
  opts.max_seconds = args.time_limit;
  opts.max_iters = static_cast<int>(args.max_iters);
  opts.kkt_tol = args.kkt_tol;
  opts.feas_tol = args.feas_tol;
  return opts;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return f;
}

Json beta_json(const Vector& b) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < b.size(); ++i) arr.push_back(b[i]);
  return arr;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string family = "lr";
  long long n = 10000;
  std::vector<double> beta;
  double split = 0.01;
  double sf_prob = 0.5;
  bool threshold_labels = false;
  long long groups = 100;
  double sigma_g = 3.0;
  unsigned long long seed = 42;
  std::string out;
};

int run_generate(const GenerateArgs& args) {
  SynthSpec spec;
  spec.family = parse_model_family(args.family);
  spec.n = static_cast<Eigen::Index>(args.n);
  if (!args.beta.empty()) {
    spec.beta.resize(static_cast<Eigen::Index>(args.beta.size()));
    for (std::size_t i = 0; i < args.beta.size(); ++i)
      spec.beta[static_cast<Eigen::Index>(i)] = args.beta[i];
  } else {
    spec.beta = is_mixed(spec.family) ? default_mixed_beta() : default_regular_beta();
  }
  spec.train_fraction = args.split;
  spec.sensitive_prob = args.sf_prob;
  spec.stochastic_labels = !args.threshold_labels;
  spec.seed = args.seed;
  spec.groups = static_cast<Eigen::Index>(args.groups);
  spec.group_sd = args.sigma_g;

  const SynthResult result = is_mixed(spec.family) ? gen_mixed(spec) : gen_regular(spec);

  fs::create_directories(args.out);
  const fs::path dir(args.out);
  write_dataset_csv_file((dir / "train.csv").string(), result.train);
  write_dataset_csv_file((dir / "test.csv").string(), result.test);

  Json manifest;
  manifest["command"] = "generate";
  Json& p = manifest["parameters"];
  p["family"] = args.family;
  p["n"] = args.n;
  p["beta"] = beta_json(spec.beta);
  p["split"] = args.split;
  p["sf_prob"] = args.sf_prob;
  p["stochastic_labels"] = spec.stochastic_labels;
  p["seed"] = args.seed;
  if (is_mixed(spec.family)) {
    p["groups"] = args.groups;
    p["sigma_g"] = args.sigma_g;
    manifest["group_effects"] = beta_json(result.group_effects);
  }
  manifest["outputs"] = {"train.csv", "test.csv"};
  write_json_file((dir / "manifest.json").string(), manifest);

  std::cout << "wrote " << result.train.rows() << " train rows and " << result.test.rows()
            << " test rows to " << args.out << "\n";
  return 0;
}

// -------------------------------------------------------------- fit-predict

struct FitArgs {
  std::string train, test;
  std::string label = "y";
  std::string group;
  std::string coding = "pm1";
  std::vector<std::string> sf;
  std::string family = "lr";
  std::string constraint = "none";
  double c = 0.1;
  double mu = 1.0;
  double lambda = 1.0;
  std::string pre = "id";
  long long rounds = 1;
  std::string post = "none";
  std::string sfpre, sfpost;
  double guard = 0.05;
  unsigned long long seed = 42;
  bool trace = false;
  SolverArgs solver;
  std::string out;
};

Dataset load_dataset(const std::string& path, const IngestSpec& spec) {
  Table t;
  try {
    t = read_csv_file(path);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  // Missing label column is fine for scoring-only data.
  IngestSpec effective = spec;
  if (effective.label_col && t.find(*effective.label_col) < 0) effective.label_col.reset();
  try {
    return ingest_dataset(t, effective);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

int run_fit(const FitArgs& args) {
  PipelineConfig config;
  ModelSpec spec;
  spec.family = parse_model_family(args.family);
  spec.constraint = parse_constraint_family(args.constraint);
  spec.fairness_threshold = args.c;
  spec.slack_weight = args.mu;
  spec.group_penalty = args.lambda;
  config.inprocess = spec;
  if (args.pre == "id")
    config.preprocess = PreprocessKind::None;
  else if (args.pre == "di")
    config.preprocess = PreprocessKind::DisparateResample;
  else
    throw std::invalid_argument("unknown preprocessing: " + args.pre + " (expected id or di)");
  if (args.post != "none") config.postprocess = parse_fairness_metric(args.post);
  config.sensitive_features = args.sf;
  if (!args.sfpre.empty()) config.sf_pre = args.sfpre;
  if (!args.sfpost.empty()) config.sf_post = args.sfpost;
  config.resample_rounds = static_cast<int>(args.rounds);
  config.seed = args.seed;
  config.accuracy_guard = args.guard;
  config.solver = to_solver_options(args.solver);
  if (is_mixed(spec.family) && args.group.empty())
    throw std::invalid_argument("mixed model families need --group naming the group column");

  IngestSpec ingest;
  ingest.label_col = args.label;
  ingest.sensitive_cols = args.sf;
  if (!args.group.empty()) ingest.group_col = args.group;
  if (args.coding == "01")
    ingest.coding = LabelCoding::ZeroOne;
  else if (args.coding != "pm1")
    throw std::invalid_argument("unknown label coding: " + args.coding + " (expected pm1 or 01)");

  const Dataset train = load_dataset(args.train, ingest);
  const Dataset test = load_dataset(args.test, ingest);

  fs::create_directories(args.out);
  const fs::path dir(args.out);

  std::vector<IterationRecord> trace;
  if (args.trace)
    config.solver.on_iteration = [&trace](const IterationRecord& rec) { trace.push_back(rec); };

  const FairPredResult result = run_fair_pred(train, test, config);

  {
    auto f = open_out(dir / "predictions.csv");
    f << "row,probability,class\n";
    for (Eigen::Index i = 0; i < result.classifications.size(); ++i)
      f << i << ',' << detail::format_double(result.probabilities[i]) << ','
        << (result.classifications[i] > 0 ? 1 : -1) << '\n';
  }

  if (result.solution) {
    write_json_file((dir / "solution.json").string(), solution_to_json(*result.solution));
    write_json_file((dir / "coefficients.json").string(),
                    coefficients_to_json(result.coefficients, spec.family));
  }
  if (result.cutoff_choice) {
    auto f = open_out(dir / "cutoff_trace.csv");
    f << "cutoff,accuracy,fairness,admissible\n";
    for (const auto& pt : result.cutoff_choice->trace) {
      f << detail::format_double(pt.cutoff) << ',' << detail::format_double(pt.accuracy) << ',';
      if (std::isnan(pt.fairness))
        f << "NA";
      else
        f << detail::format_double(pt.fairness);
      f << ',' << (pt.admissible ? 1 : 0) << '\n';
    }
  }
  if (args.trace) {
    auto f = open_out(dir / "iterations.csv");
    f << "iteration,objective,max_residual,tau\n";
    for (const auto& rec : trace)
      f << rec.iteration << ',' << detail::format_double(rec.objective) << ','
        << detail::format_double(rec.max_residual) << ',' << detail::format_double(rec.tau)
        << '\n';
  }

  Json manifest;
  manifest["command"] = "fit-predict";
  Json& p = manifest["parameters"];
  p["train"] = args.train;
  p["test"] = args.test;
  p["label"] = args.label;
  p["group"] = args.group.empty() ? Json(nullptr) : Json(args.group);
  p["sensitive"] = args.sf;
  p["family"] = args.family;
  p["constraint"] = args.constraint;
  p["c"] = args.c;
  p["mu"] = args.mu;
  p["lambda"] = args.lambda;
  p["pre"] = args.pre;
  p["rounds"] = args.rounds;
  p["post"] = args.post;
  p["guard"] = args.guard;
  p["seed"] = args.seed;

  Json& pipe = manifest["pipeline"];
  pipe["cutoff"] = result.cutoff;
  pipe["resample_best_run"] = result.resample_best_run;
  Json run_metrics = Json::array();
  for (double v : result.resample_run_metrics)
    run_metrics.push_back(std::isfinite(v) ? Json(v) : Json(nullptr));
  pipe["resample_run_metrics"] = std::move(run_metrics);
  pipe["warnings"] = result.warnings;

  std::vector<std::string> outputs = {"predictions.csv"};
  if (result.solution) {
    outputs.push_back("solution.json");
    outputs.push_back("coefficients.json");
  }
  if (result.cutoff_choice) outputs.push_back("cutoff_trace.csv");
  if (args.trace) outputs.push_back("iterations.csv");

  // Test metrics only when the test file carried labels.
  if (test.labels) {
    Json metrics = metrics_to_json(final_metrics(*test.labels, result.classifications));
    Json fairness;
    for (const auto& sf : args.sf) {
      Json one;
      const auto put = [&](const char* key, FairnessMetric m) {
        try {
          one[key] = fairness_metric_value(m, test, *test.labels, result.classifications, sf);
        } catch (const std::exception&) {
          one[key] = nullptr;
        }
      };
      put("di", FairnessMetric::DisparateImpact);
      put("dm", FairnessMetric::DisparateMistreatment);
      put("fpr_gap", FairnessMetric::FprGap);
      put("fnr_gap", FairnessMetric::FnrGap);
      fairness[sf] = std::move(one);
    }
    metrics["fairness"] = std::move(fairness);
    write_json_file((dir / "metrics.json").string(), metrics);
    outputs.push_back("metrics.json");
  }

  manifest["outputs"] = outputs;
  write_json_file((dir / "manifest.json").string(), manifest);

  std::cout << "status: "
            << (result.solution ? solve_status_name(result.solution->status) : "plugin")
            << ", cutoff: " << result.cutoff << ", outputs in " << args.out << "\n";
  return 0;
}

// ----------------------------------------------------------------- simulate

struct SimArgs {
  std::string grid = "regular";
  long long runs = 20;
  long long n = 10000;
  double split = 0.01;
  double c = 0.1;
  double mu = 1.0;
  double lambda = 1.0;
  long long groups = 100;
  double sigma_g = 3.0;
  bool threshold_labels = false;
  unsigned long long seed = 42;
  long long workers = 0;
  std::vector<long long> scenarios;
  SolverArgs solver;
  std::string out;
};

int run_sim(const SimArgs& args) {
  SimulationSpec spec;
  if (args.grid == "regular")
    spec.scenarios = regular_grid();
  else if (args.grid == "mixed")
    spec.scenarios = mixed_grid();
  else
    throw std::invalid_argument("unknown grid: " + args.grid + " (expected regular or mixed)");

  if (!args.scenarios.empty()) {
    std::vector<Scenario> picked;
    for (long long id : args.scenarios) {
      bool found = false;
      for (const auto& sc : spec.scenarios)
        if (sc.id == id) {
          picked.push_back(sc);
          found = true;
          break;
        }
      if (!found)
        throw std::invalid_argument("scenario " + std::to_string(id) + " is not in the " +
                                    args.grid + " grid");
    }
    spec.scenarios = std::move(picked);
  }

  spec.runs = static_cast<int>(args.runs);
  spec.n = static_cast<Eigen::Index>(args.n);
  spec.train_fraction = args.split;
  spec.fairness_threshold = args.c;
  spec.slack_weight = args.mu;
  spec.group_penalty = args.lambda;
  spec.groups = static_cast<Eigen::Index>(args.groups);
  spec.group_sd = args.sigma_g;
  spec.stochastic_labels = !args.threshold_labels;
  spec.base_seed = args.seed;
  spec.solver = to_solver_options(args.solver);
  spec.workers = args.workers > 0
                     ? static_cast<int>(args.workers)
                     : std::max(1u, std::thread::hardware_concurrency());

  const std::vector<SimRow> rows = simulate(spec);

  {
    auto f = open_out(args.out);
    write_simulation_csv(f, rows);
  }

  Json manifest;
  manifest["command"] = "simulate";
  Json& p = manifest["parameters"];
  p["grid"] = args.grid;
  p["scenarios"] = args.scenarios.empty() ? Json("all") : Json(args.scenarios);
  p["runs"] = args.runs;
  p["n"] = args.n;
  p["split"] = args.split;
  p["c"] = args.c;
  p["mu"] = args.mu;
  p["lambda"] = args.lambda;
  p["groups"] = args.groups;
  p["sigma_g"] = args.sigma_g;
  p["stochastic_labels"] = spec.stochastic_labels;
  p["seed"] = args.seed;
  p["time_limit"] = args.solver.time_limit;
  manifest["outputs"] = {args.out};
  write_json_file(args.out + ".manifest.json", manifest);

  long long failed = 0;
  for (const auto& r : rows)
    if (r.metric == "failed") ++failed;
  std::cout << "wrote " << rows.size() << " rows for " << spec.scenarios.size()
            << " scenarios to " << args.out << " (" << failed << " failed runs)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fair binary classification toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI/TOML file (sections per subcommand)");

  GenerateArgs gen;
  CLI::App* cgen = app.add_subcommand("generate", "write a synthetic train/test split");
  cgen->fallthrough();  // a trailing --config still reaches the top-level app
  cgen->add_option("--family", gen.family, "label mechanism: lr, svm, melr, mesvm");
  cgen->add_option("--n", gen.n, "total rows")->check(CLI::PositiveNumber);
  cgen->add_option("--beta", gen.beta, "true coefficients, intercept first, sensitive last")
      ->delimiter(',');
  cgen->add_option("--split", gen.split, "training fraction");
  cgen->add_option("--sf-prob", gen.sf_prob, "P(sensitive = 1)");
  cgen->add_flag("--threshold-labels", gen.threshold_labels,
                 "deterministic sign labels instead of Bernoulli draws");
  cgen->add_option("--groups", gen.groups, "number of groups (mixed families)");
  cgen->add_option("--sigma-g", gen.sigma_g, "std. dev. of the true group effects");
  cgen->add_option("--seed", gen.seed, "generator seed");
  cgen->add_option("--out", gen.out, "output directory")->required();

  FitArgs fit;
  CLI::App* cfit = app.add_subcommand("fit-predict", "run one pipeline and score test data");
  cfit->fallthrough();  // a trailing --config still reaches the top-level app
  cfit->add_option("--train", fit.train, "training CSV")->required();
  cfit->add_option("--test", fit.test, "test CSV")->required();
  cfit->add_option("--label", fit.label, "label column name");
  cfit->add_option("--group", fit.group, "group column name (mixed families)");
  cfit->add_option("--coding", fit.coding, "label coding in the files: pm1 or 01");
  cfit->add_option("--sf", fit.sf, "sensitive feature column(s)")
      ->required()
      ->delimiter(',');
  cfit->add_option("--family", fit.family, "model family: lr, svm, melr, mesvm");
  cfit->add_option("--constraint", fit.constraint, "fairness constraint: none, di, fnr, fpr, dm");
  cfit->add_option("--c", fit.c, "fairness constraint bound");
  cfit->add_option("--mu", fit.mu, "slack weight (svm families)");
  cfit->add_option("--lambda", fit.lambda, "group-effect penalty (mixed families)");
  cfit->add_option("--pre", fit.pre, "preprocessing: id or di");
  cfit->add_option("--R", fit.rounds, "balanced-resampling repetitions");
  cfit->add_option("--post", fit.post, "cutoff tuning target: none, di, dm, fpr, fnr");
  cfit->add_option("--sfpre", fit.sfpre, "sensitive feature for preprocessing");
  cfit->add_option("--sfpost", fit.sfpost, "sensitive feature for cutoff tuning");
  cfit->add_option("--guard", fit.guard, "admissible accuracy drop in the cutoff sweep");
  cfit->add_option("--seed", fit.seed, "resampling seed");
  cfit->add_flag("--trace", fit.trace, "write per-iteration solver trace");
  add_solver_options(cfit, fit.solver);
  cfit->add_option("--out", fit.out, "output directory")->required();

  SimArgs sim;
  CLI::App* csim = app.add_subcommand("simulate", "run the benchmark grid on synthetic data");
  csim->fallthrough();  // a trailing --config still reaches the top-level app
  csim->add_option("--grid", sim.grid, "scenario grid: regular or mixed");
  csim->add_option("--scenario", sim.scenarios, "restrict to specific scenario ids")
      ->delimiter(',');
  csim->add_option("--runs", sim.runs, "repetitions per scenario")->check(CLI::PositiveNumber);
  csim->add_option("--n", sim.n, "rows per synthetic data set")->check(CLI::PositiveNumber);
  csim->add_option("--split", sim.split, "training fraction");
  csim->add_option("--c", sim.c, "fairness constraint bound");
  csim->add_option("--mu", sim.mu, "slack weight (svm families)");
  csim->add_option("--lambda", sim.lambda, "group-effect penalty (mixed families)");
  csim->add_option("--groups", sim.groups, "groups per mixed data set");
  csim->add_option("--sigma-g", sim.sigma_g, "std. dev. of the true group effects");
  csim->add_flag("--threshold-labels", sim.threshold_labels,
                 "deterministic sign labels instead of Bernoulli draws");
  csim->add_option("--seed", sim.seed, "base seed");
  csim->add_option("--workers", sim.workers, "worker threads (0 = all cores)");
  add_solver_options(csim, sim.solver);
  csim->add_option("--out", sim.out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cgen->parsed()) return run_generate(gen);
    if (cfit->parsed()) return run_fit(fit);
    return run_sim(sim);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
