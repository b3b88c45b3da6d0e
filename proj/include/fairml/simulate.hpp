#pragma once

#include "fairml/ingest.hpp"
#include "fairml/metrics.hpp"
#include "fairml/pipeline.hpp"
#include "fairml/rng.hpp"
#include "fairml/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fairml {

/// One cell of the benchmark grid: a preprocessing arm, a model/constraint
/// pair, and a post-processing arm.
struct Scenario {
  int id = 0;
  bool mixed = false;
  PreprocessKind preprocess = PreprocessKind::None;
  int resample_rounds = 1;
  ModelFamily family = ModelFamily::LogisticRegression;
  ConstraintFamily constraint = ConstraintFamily::None;
  std::optional<FairnessMetric> postprocess;

  std::string pre_label() const {
    if (preprocess == PreprocessKind::None) return "id";
    return "di" + std::to_string(resample_rounds);
  }
  std::string post_label() const {
    return postprocess ? fairness_metric_name(*postprocess) : "none";
  }
};

/// The 90 plain-model scenarios: {id, di x1, di x5} resampling by {lr, svm} x
/// {none, di, fnr, fpr, dm} constraints by {none, di, dm} cutoff tuning.
inline std::vector<Scenario> regular_grid() {
  const ConstraintFamily constraints[] = {
      ConstraintFamily::None, ConstraintFamily::DisparateImpact,
      ConstraintFamily::FalseNegativeRate, ConstraintFamily::FalsePositiveRate,
      ConstraintFamily::DisparateMistreatment};
  const std::optional<FairnessMetric> posts[] = {
      std::nullopt, FairnessMetric::DisparateImpact, FairnessMetric::DisparateMistreatment};
  std::vector<Scenario> grid;
  int id = 1;
  for (int pre = 0; pre < 3; ++pre)
    for (ModelFamily family : {ModelFamily::LogisticRegression, ModelFamily::Svm})
      for (ConstraintFamily constraint : constraints)
        for (const auto& post : posts) {
          Scenario s;
          s.id = id++;
          s.preprocess = pre == 0 ? PreprocessKind::None : PreprocessKind::DisparateResample;
          s.resample_rounds = pre == 2 ? 5 : 1;
          s.family = family;
          s.constraint = constraint;
          s.postprocess = post;
          grid.push_back(s);
        }
  return grid;
}

/// The 30 grouped-data scenarios: {melr, mesvm} x five constraints x three
/// post arms; balanced resampling is not defined for grouped data.
inline std::vector<Scenario> mixed_grid() {
  const ConstraintFamily constraints[] = {
      ConstraintFamily::None, ConstraintFamily::DisparateImpact,
      ConstraintFamily::FalseNegativeRate, ConstraintFamily::FalsePositiveRate,
      ConstraintFamily::DisparateMistreatment};
  const std::optional<FairnessMetric> posts[] = {
      std::nullopt, FairnessMetric::DisparateImpact, FairnessMetric::DisparateMistreatment};
  std::vector<Scenario> grid;
  int id = 1;
  for (ModelFamily family : {ModelFamily::MixedLogisticRegression, ModelFamily::MixedSvm})
    for (ConstraintFamily constraint : constraints)
      for (const auto& post : posts) {
        Scenario s;
        s.id = id++;
        s.mixed = true;
        s.family = family;
        s.constraint = constraint;
        s.postprocess = post;
        grid.push_back(s);
      }
  return grid;
}

struct SimulationSpec {
  std::vector<Scenario> scenarios;
  int runs = 20;
  Eigen::Index n = 10000;
  double train_fraction = 0.01;
  double fairness_threshold = 0.1;
  double slack_weight = 1.0;
  double group_penalty = 1.0;
  Eigen::Index groups = 100;
  double group_sd = 3.0;
  bool stochastic_labels = true;
  std::uint64_t base_seed = 42;
  SolverOptions solver;
  int workers = 1;
};

/// One tidy observation: a metric value for (scenario, run).
struct SimRow {
  int scenario = 0;
  int run = 0;
  std::string pre, family, constraint, post;
  std::string metric;
  double value = 0.0;
};

namespace detail {

inline double metric_or_nan(const std::function<double()>& f) {
  try {
    return f();
  } catch (const std::exception&) {
    return kUndefined;
  }
}

}  // namespace detail

/// Generates one synthetic data split, runs the scenario's pipeline on it,
/// and scores the test predictions. Emits one row per metric plus the solver
/// status code; a thrown pipeline error collapses to a single `failed` row.
inline std::vector<SimRow> run_scenario_once(const SimulationSpec& spec, const Scenario& sc,
                                             int run) {
  SimRow base;
  base.scenario = sc.id;
  base.run = run;
  base.pre = sc.pre_label();
  base.family = model_family_name(sc.family);
  base.constraint = constraint_family_name(sc.constraint);
  base.post = sc.post_label();

  std::vector<SimRow> rows;
  const auto emit = [&](const std::string& metric, double value) {
    SimRow r = base;
    r.metric = metric;
    r.value = value;
    rows.push_back(std::move(r));
  };

  try {
    const std::uint64_t run_seed =
        derive_seed(spec.base_seed, static_cast<std::uint64_t>(sc.id),
                    static_cast<std::uint64_t>(run));
    SynthSpec ss;
    ss.n = spec.n;
    ss.beta = sc.mixed ? default_mixed_beta() : default_regular_beta();
    ss.family = sc.family;
    ss.stochastic_labels = spec.stochastic_labels;
    ss.train_fraction = spec.train_fraction;
    ss.seed = run_seed;
    ss.groups = spec.groups;
    ss.group_sd = spec.group_sd;
    const SynthResult data = sc.mixed ? gen_mixed(ss) : gen_regular(ss);

    PipelineConfig config;
    ModelSpec ms;
    ms.family = sc.family;
    ms.constraint = sc.constraint;
    ms.fairness_threshold = spec.fairness_threshold;
    ms.slack_weight = spec.slack_weight;
    ms.group_penalty = spec.group_penalty;
    config.inprocess = ms;
    config.preprocess = sc.preprocess;
    config.resample_rounds = sc.resample_rounds;
    config.postprocess = sc.postprocess;
    config.sensitive_features = {"s"};
    config.solver = spec.solver;
    // keep the resampling draws on a stream separate from the data draws
    config.seed = derive_seed(run_seed, 1);

    const FairPredResult result = run_fair_pred(data.train, data.test, config);
    const Vector& y = *data.test.labels;
    const Vector& preds = result.classifications;
    const Dataset& test = data.test;

    emit("accuracy", detail::metric_or_nan(
                         [&] { return final_metrics(y, preds).accuracy; }));
    emit("di", detail::metric_or_nan([&] { return disparate_impact(test, preds, "s"); }));
    emit("dm", detail::metric_or_nan(
                   [&] { return disparate_mistreatment(test, y, preds, "s"); }));
    emit("fpr_gap", detail::metric_or_nan(
                        [&] { return rate_gap(test, y, preds, "s", RateKind::FPR); }));
    emit("fnr_gap", detail::metric_or_nan(
                        [&] { return rate_gap(test, y, preds, "s", RateKind::FNR); }));
    emit("tpr_gap", detail::metric_or_nan(
                        [&] { return rate_gap(test, y, preds, "s", RateKind::TPR); }));
    emit("tnr_gap", detail::metric_or_nan(
                        [&] { return rate_gap(test, y, preds, "s", RateKind::TNR); }));
    emit("solver_status",
         result.solution ? static_cast<double>(solve_status_code(result.solution->status))
                         : kUndefined);
  } catch (const std::exception&) {
    rows.clear();
    emit("failed", 1.0);
  }
  return rows;
}

/// Runs the whole grid, spec.runs repetitions per scenario, on a small worker
/// pool. Rows come back in (scenario, run, metric) order regardless of the
/// worker count, so reruns of the same spec are byte-identical.
inline std::vector<SimRow> simulate(const SimulationSpec& spec) {
  if (spec.runs < 1) throw std::invalid_argument("simulate: runs must be >= 1");
  const std::size_t jobs = spec.scenarios.size() * static_cast<std::size_t>(spec.runs);
  std::vector<std::vector<SimRow>> results(jobs);

  const int workers = std::max(1, std::min<int>(spec.workers, static_cast<int>(jobs)));
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t j = next.fetch_add(1); j < jobs; j = next.fetch_add(1)) {
      const Scenario& sc = spec.scenarios[j / static_cast<std::size_t>(spec.runs)];
      const int run = static_cast<int>(j % static_cast<std::size_t>(spec.runs));
      results[j] = run_scenario_once(spec, sc, run);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::vector<SimRow> rows;
  for (auto& block : results)
    for (auto& r : block) rows.push_back(std::move(r));
  return rows;
}

/// Tidy long-format CSV; undefined values print as NA.
inline void write_simulation_csv(std::ostream& out, const std::vector<SimRow>& rows) {
  out << "scenario,run,pre,family,constraint,post,metric,value\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.run << ',' << r.pre << ',' << r.family << ',' << r.constraint
        << ',' << r.post << ',' << r.metric << ',';
    if (std::isnan(r.value))
      out << "NA";
    else
      out << detail::format_double(r.value);
    out << '\n';
  }
}

}  // namespace fairml
