#pragma once

#include "fairml/dataset.hpp"
#include "fairml/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairml {

/// Classifies at probability cutoff v: class +1 iff p >= v.
inline Vector apply_cutoff(const Vector& probs, double cutoff) {
  Vector preds(probs.size());
  for (Eigen::Index i = 0; i < probs.size(); ++i) preds[i] = probs[i] >= cutoff ? 1.0 : -1.0;
  return preds;
}

/// Identity post-processing: the conventional 0.5 cutoff.
inline Vector id_post(const Vector& probs) { return apply_cutoff(probs, 0.5); }

/// One grid point of the cutoff sweep. fairness is NaN when the metric is
/// undefined at this cutoff; admissible records the accuracy test only.
struct CutoffPoint {
  double cutoff = 0.0;
  double accuracy = 0.0;
  double fairness = kUndefined;
  bool admissible = false;
};

struct CutoffChoice {
  double best = 0.5;
  double baseline_accuracy = 0.0;  // accuracy at the 0.5 cutoff
  std::vector<CutoffPoint> trace;  // all 99 grid points, in cutoff order
};

namespace detail {

inline double accuracy_at(const Vector& y_true, const Vector& preds) {
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < y_true.size(); ++i)
    if (y_true[i] == preds[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

}  // namespace detail

/// Sweeps cutoffs 0.01, 0.02, ..., 0.99 and picks the admissible one that
/// maximizes accuracy minus unfairness. Admissible means the accuracy stays
/// within the guard fraction of the 0.5-cutoff accuracy (at most a 5% drop by
/// default). Cutoffs where the metric is undefined never win; exact score
/// ties go to the cutoff nearest 0.5, then to the smaller one. If no
/// admissible cutoff has a defined metric the choice falls back to 0.5.
inline CutoffChoice cutoff_sweep(const Dataset& d, const Vector& probs, const std::string& sf,
                                 FairnessMetric metric, double accuracy_guard = 0.05) {
  if (!d.labels) throw std::invalid_argument("cutoff_sweep: data has no labels");
  if (probs.size() != d.rows())
    throw std::invalid_argument("cutoff_sweep: probability vector length does not match data");
  if (d.rows() == 0) throw std::invalid_argument("cutoff_sweep: data is empty");
  if (accuracy_guard < 0 || accuracy_guard >= 1)
    throw std::invalid_argument("cutoff_sweep: accuracy guard must lie in [0, 1)");
  const Vector& y = *d.labels;

  CutoffChoice choice;
  choice.baseline_accuracy = detail::accuracy_at(y, apply_cutoff(probs, 0.5));
  const double floor = (1.0 - accuracy_guard) * choice.baseline_accuracy;

  bool found = false;
  double best_score = 0.0;
  for (int i = 1; i <= 99; ++i) {
    CutoffPoint pt;
    pt.cutoff = static_cast<double>(i) / 100.0;
    const Vector preds = apply_cutoff(probs, pt.cutoff);
    pt.accuracy = detail::accuracy_at(y, preds);
    pt.admissible = pt.accuracy >= floor;
    try {
      pt.fairness = fairness_metric_value(metric, d, y, preds, sf);
    } catch (const std::exception&) {
      pt.fairness = kUndefined;
    }
    if (pt.admissible && !std::isnan(pt.fairness)) {
      const double score = pt.accuracy - pt.fairness;
      bool better = !found || score > best_score;
      if (found && score == best_score) {
        const double d_new = std::abs(pt.cutoff - 0.5);
        const double d_old = std::abs(choice.best - 0.5);
        better = d_new < d_old || (d_new == d_old && pt.cutoff < choice.best);
      }
      if (better) {
        choice.best = pt.cutoff;
        best_score = score;
        found = true;
      }
    }
    choice.trace.push_back(pt);
  }
  if (!found) choice.best = 0.5;
  return choice;
}

}  // namespace fairml
