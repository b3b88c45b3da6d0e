#pragma once

#include "fairml/cutoff.hpp"
#include "fairml/dataset.hpp"
#include "fairml/metrics.hpp"
#include "fairml/objectives.hpp"
#include "fairml/resample.hpp"
#include "fairml/solver.hpp"

#include <any>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace fairml {

/// An externally supplied classifier: an opaque fit state plus a probability
/// scorer. Plugins replace the built-in in-processing stage, so they carry no
/// fairness constraints of their own; pre- and post-processing still apply.
struct PluginClassifier {
  std::function<std::any(const Matrix&, const Vector&)> fit;
  std::function<Vector(const std::any&, const Matrix&)> predict_proba;
};

enum class PreprocessKind { None, DisparateResample };

struct PipelineConfig {
  std::variant<ModelSpec, PluginClassifier> inprocess = ModelSpec{};
  PreprocessKind preprocess = PreprocessKind::None;
  std::optional<FairnessMetric> postprocess;    // nullopt keeps the 0.5 cutoff
  std::vector<std::string> sensitive_features;  // shared default for all stages
  std::optional<std::string> sf_pre;            // resampling feature, default first shared
  std::optional<std::string> sf_post;           // cutoff-sweep feature, default first shared
  std::optional<double> fairness_threshold;     // overrides the model spec's bound
  int resample_rounds = 1;                      // repetitions of the balanced resample
  std::uint64_t seed = 42;
  SolverOptions solver;
  double accuracy_guard = 0.05;  // admissible accuracy drop in the cutoff sweep
};

/// A solved built-in model, scoring new data through the logistic link.
struct FittedModel {
  Coefficients coeffs;
  ModelFamily family = ModelFamily::LogisticRegression;
  Solution solution;
  Vector predict_proba(const Dataset& d) const {
    return fairml::predict_proba(coeffs, d, family);
  }
};

/// A fitted plugin: the opaque state plus the scoring hook that reads it.
struct FittedPlugin {
  std::any state;
  PluginClassifier plugin;
  Vector predict_proba(const Dataset& d) const { return plugin.predict_proba(state, d.features); }
};

/// Everything the full pipeline produced, for reporting and audit.
struct FairPredResult {
  Vector classifications;  // +-1 per test row
  Vector probabilities;    // class-membership probabilities per test row
  double cutoff = 0.5;
  std::optional<CutoffChoice> cutoff_choice;  // present when post-processing ran
  std::optional<Solution> solution;           // present for built-in models
  Coefficients coefficients;                  // built-in models only
  bool used_plugin = false;
  int resample_best_run = -1;  // winning repetition, -1 when preprocessing was off
  std::vector<double> resample_run_metrics;
  std::vector<std::string> warnings;
};

namespace detail {

inline const std::string& stage_sensitive(const PipelineConfig& config,
                                          const std::optional<std::string>& chosen,
                                          const char* stage) {
  if (chosen) return *chosen;
  if (config.sensitive_features.empty())
    throw std::invalid_argument(std::string(stage) +
                                " needs a sensitive feature but none is configured");
  return config.sensitive_features.front();
}

// Shared pre -> fit -> post flow over either model kind.
template <typename Fitter>
FairPredResult run_stages(const Dataset& train, const Dataset& test,
                          const PipelineConfig& config, Fitter&& fitter) {
  using Model = std::decay_t<decltype(fitter(train))>;
  FairPredResult out;
  Model model;

  if (config.preprocess == PreprocessKind::DisparateResample) {
    const std::string& sf = stage_sensitive(config, config.sf_pre, "balanced resampling");
    // The repetition is judged on the metric the post-processing stage will
    // target; everything except the mistreatment sweep selects on impact.
    const FairnessMetric selection_metric =
        config.postprocess == FairnessMetric::DisparateMistreatment
            ? FairnessMetric::DisparateMistreatment
            : FairnessMetric::DisparateImpact;
    auto sel = resample_select(train, sf, config.resample_rounds, config.seed, selection_metric,
                               fitter);
    model = std::move(sel.best);
    out.resample_best_run = sel.best_run;
    out.resample_run_metrics = std::move(sel.run_metrics);
    out.warnings = std::move(sel.warnings);
  } else {
    model = fitter(train);
  }

  if constexpr (std::is_same_v<Model, FittedModel>) {
    out.solution = model.solution;
    out.coefficients = model.coeffs;
  } else {
    out.used_plugin = true;
  }

  out.probabilities = model.predict_proba(test);
  if (config.postprocess) {
    const std::string& sf = stage_sensitive(config, config.sf_post, "cutoff sweep");
    // The sweep is tuned on the full original training data, never on test.
    out.cutoff_choice = cutoff_sweep(train, model.predict_proba(train), sf, *config.postprocess,
                                     config.accuracy_guard);
    out.cutoff = out.cutoff_choice->best;
  }
  out.classifications = apply_cutoff(out.probabilities, out.cutoff);
  return out;
}

}  // namespace detail

/// Full pipeline on plain (ungrouped) data: optional balanced resampling,
/// a built-in constrained model or plugin fit, optional cutoff tuning, and
/// classification of the test rows.
inline FairPredResult run_fair_pred(const Dataset& train, const Dataset& test,
                                    const PipelineConfig& config) {
  if (!train.labels) throw std::invalid_argument("fair_pred: training data has no labels");
  if (train.cols() != test.cols())
    throw std::invalid_argument("fair_pred: train and test feature widths differ");
  if (config.preprocess == PreprocessKind::DisparateResample && config.resample_rounds < 1)
    throw std::invalid_argument("fair_pred: resample repetitions must be >= 1");

  if (std::holds_alternative<ModelSpec>(config.inprocess)) {
    ModelSpec spec = std::get<ModelSpec>(config.inprocess);
    if (is_mixed(spec.family) && config.preprocess != PreprocessKind::None)
      throw std::invalid_argument(
          "fair_pred: balanced resampling is not supported for mixed-effects families");
    if (spec.sensitive_features.empty()) spec.sensitive_features = config.sensitive_features;
    if (config.fairness_threshold) spec.fairness_threshold = *config.fairness_threshold;
    auto fitter = [&](const Dataset& d) -> FittedModel {
      Solution sol = solve(assemble_problem(spec, d), config.solver);
      return FittedModel{sol.coeffs, spec.family, std::move(sol)};
    };
    return detail::run_stages(train, test, config, fitter);
  }
  const auto& plugin = std::get<PluginClassifier>(config.inprocess);
  if (!plugin.fit || !plugin.predict_proba)
    throw std::invalid_argument("fair_pred: plugin classifier is missing fit or predict hooks");
  auto fitter = [&](const Dataset& d) -> FittedPlugin {
    return FittedPlugin{plugin.fit(d.features, *d.labels), plugin};
  };
  return detail::run_stages(train, test, config, fitter);
}

/// Convenience wrapper returning only the +-1 classifications.
inline Vector fair_pred(const Dataset& train, const Dataset& test, const PipelineConfig& config) {
  return run_fair_pred(train, test, config).classifications;
}

namespace detail {

inline Dataset with_groups(const Dataset& d, const std::vector<std::string>& groups,
                           const std::vector<std::string>* level_order = nullptr) {
  if (static_cast<Eigen::Index>(groups.size()) != d.rows())
    throw std::invalid_argument("group labels do not match the number of rows");
  Dataset out = d;
  out.group_levels = level_order ? *level_order : std::vector<std::string>{};
  std::vector<int> ids;
  ids.reserve(groups.size());
  for (const auto& name : groups) {
    int id = -1;
    for (std::size_t j = 0; j < out.group_levels.size(); ++j)
      if (out.group_levels[j] == name) {
        id = static_cast<int>(j);
        break;
      }
    if (id < 0) {
      id = static_cast<int>(out.group_levels.size());
      out.group_levels.push_back(name);
    }
    ids.push_back(id);
  }
  out.group_ids = std::move(ids);
  out.check();
  return out;
}

}  // namespace detail

/// Grouped-data pipeline for the mixed-effects families. Balanced resampling
/// is not available here, and the test rows carry their own group labels;
/// groups never seen in training predict with a zero random effect.
inline FairPredResult run_fair_pred_mixed(const Dataset& train, const Dataset& test,
                                          const std::vector<std::string>& groups_train,
                                          const std::vector<std::string>& groups_test,
                                          const PipelineConfig& config) {
  if (config.preprocess != PreprocessKind::None)
    throw std::invalid_argument("fair_pred_mixed: preprocessing is not supported with groups");
  if (!std::holds_alternative<ModelSpec>(config.inprocess))
    throw std::invalid_argument("fair_pred_mixed: plugin classifiers cannot take group effects");
  if (!is_mixed(std::get<ModelSpec>(config.inprocess).family))
    throw std::invalid_argument("fair_pred_mixed: model family must be a mixed-effects one");
  const Dataset train_g = detail::with_groups(train, groups_train);
  const Dataset test_g = detail::with_groups(test, groups_test);
  return run_fair_pred(train_g, test_g, config);
}

inline Vector fair_pred_mixed(const Dataset& train, const Dataset& test,
                              const std::vector<std::string>& groups_train,
                              const std::vector<std::string>& groups_test,
                              const PipelineConfig& config) {
  return run_fair_pred_mixed(train, test, groups_train, groups_test, config).classifications;
}

}  // namespace fairml
