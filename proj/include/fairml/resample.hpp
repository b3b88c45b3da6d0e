#pragma once

#include "fairml/dataset.hpp"
#include "fairml/metrics.hpp"
#include "fairml/rng.hpp"

#include <cmath>
#include <concepts>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace fairml {

/// Identity preprocessing: the training data passes through untouched.
inline Dataset id_pre(const Dataset& d) { return d; }

/// One balanced draw: every label/sensitive cell resampled to the common size.
struct ResampleRun {
  Dataset resampled;
  std::uint64_t rng_seed = 0;
  Eigen::Index common_size = 0;  // rows drawn per cell, min of the four cell sizes
};

/// Balances the four label-by-sensitive cells by sampling each one with
/// replacement down (or up) to the smallest cell size J, so the result has 4J
/// rows, equal positive rates across categories, and a balanced label split.
/// Cells are drawn and concatenated in a fixed order, so one seed fully
/// determines the output.
inline ResampleRun di_resample(const Dataset& d, const std::string& sf, std::uint64_t seed) {
  if (!d.labels) throw std::invalid_argument("di_resample: data has no labels");
  const Partition part = partition(d, sf);
  const struct {
    const char* name;
    const IndexList* rows;
  } cells[] = {
      {"negative-label rows with sensitive value 0", &part.all.dn0},
      {"negative-label rows with sensitive value 1", &part.all.dn1},
      {"positive-label rows with sensitive value 0", &part.all.dp0},
      {"positive-label rows with sensitive value 1", &part.all.dp1},
  };
  Eigen::Index common = std::numeric_limits<Eigen::Index>::max();
  for (const auto& cell : cells) {
    if (cell.rows->empty())
      throw std::invalid_argument("di_resample: no " + std::string(cell.name));
    common = std::min(common, static_cast<Eigen::Index>(cell.rows->size()));
  }

  Rng rng(seed);
  IndexList picked;
  picked.reserve(static_cast<std::size_t>(4 * common));
  for (const auto& cell : cells)
    for (Eigen::Index j = 0; j < common; ++j)
      picked.push_back((*cell.rows)[static_cast<std::size_t>(rng.below(cell.rows->size()))]);

  ResampleRun run;
  run.resampled = d.select_rows(picked);
  run.rng_seed = seed;
  run.common_size = common;
  return run;
}

template <typename F>
concept ResampleFitter = requires(F f, const Dataset& d) {
  { std::invoke(f, d) };
  { std::invoke(f, d).predict_proba(d) } -> std::convertible_to<Vector>;
};

/// Result of the repeated-resampling selection: the model fit on the winning
/// draw, which draw won, and the per-run scores for audit.
template <typename Model>
struct ResampleSelection {
  Model best;
  Dataset best_resample;
  int best_run = 0;           // zero-based index of the winning repetition
  double best_metric = 0.0;   // its score on the full original training data
  std::vector<double> run_metrics;  // NaN marks a repetition that failed
  std::vector<std::string> warnings;
};

/// Runs `rounds` independent balanced resamples (seed + r for repetition r),
/// fits a model on each, and keeps the one whose predictions on the FULL
/// original training data score lowest on the chosen unfairness metric at the
/// 0.5 cutoff. Ties keep the earliest repetition. Repetitions whose fit
/// throws are skipped with a warning; if every one fails the last error is
/// rethrown.
template <ResampleFitter Fitter>
auto resample_select(const Dataset& train, const std::string& sf, int rounds, std::uint64_t seed,
                     FairnessMetric metric, Fitter&& fit)
    -> ResampleSelection<std::decay_t<decltype(std::invoke(fit, train))>> {
  if (rounds < 1) throw std::invalid_argument("resample_select: rounds must be >= 1");
  if (metric != FairnessMetric::DisparateImpact && metric != FairnessMetric::DisparateMistreatment)
    throw std::invalid_argument("resample_select: selection metric must be di or dm");

  ResampleSelection<std::decay_t<decltype(std::invoke(fit, train))>> sel;
  sel.run_metrics.assign(static_cast<std::size_t>(rounds),
                         std::numeric_limits<double>::quiet_NaN());
  bool have_best = false;
  std::exception_ptr last_error;

  for (int r = 0; r < rounds; ++r) {
    try {
      ResampleRun run = di_resample(train, sf, seed + static_cast<std::uint64_t>(r));
      auto model = std::invoke(fit, run.resampled);
      const Vector probs = model.predict_proba(train);
      Vector preds(probs.size());
      for (Eigen::Index i = 0; i < probs.size(); ++i) preds[i] = probs[i] >= 0.5 ? 1.0 : -1.0;
      const double score = metric == FairnessMetric::DisparateImpact
                               ? disparate_impact(train, preds, sf)
                               : disparate_mistreatment(train, *train.labels, preds, sf);
      sel.run_metrics[static_cast<std::size_t>(r)] = score;
      if (!have_best || score < sel.best_metric) {
        sel.best = std::move(model);
        sel.best_resample = std::move(run.resampled);
        sel.best_run = r;
        sel.best_metric = score;
        have_best = true;
      }
    } catch (const std::exception& e) {
      last_error = std::current_exception();
      sel.warnings.push_back("repetition " + std::to_string(r) + " failed: " + e.what());
    }
  }
  if (!have_best) {
    if (last_error) std::rethrow_exception(last_error);
    throw std::runtime_error("resample_select: no repetition produced a model");
  }
  return sel;
}

}  // namespace fairml
