#pragma once

#include "fairml/dataset.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace fairml {

/// NaN marks a rate whose denominator is empty; callers must not treat it as 0.
inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

struct ConfusionCounts {
  struct Split {
    long tp = 0, tn = 0, fp = 0, fn = 0;
  };
  long tp = 0, tn = 0, fp = 0, fn = 0;
  std::optional<Split> by_s0, by_s1; // per sensitive category when requested

  long total() const { return tp + tn + fp + fn; }
};

struct MetricsBundle {
  double accuracy = kUndefined;
  double fpr = kUndefined;
  double fnr = kUndefined;
  double tpr = kUndefined;
  double tnr = kUndefined;
  double recall = kUndefined;
  ConfusionCounts counts;
};

inline ConfusionCounts confusion_counts(const Vector& y_true, const Vector& y_pred,
                                        const Vector* s = nullptr) {
  if (y_true.size() != y_pred.size())
    throw std::invalid_argument("confusion_counts: length mismatch");
  if (y_true.size() == 0) throw std::invalid_argument("confusion_counts: empty input");
  if (s && s->size() != y_true.size())
    throw std::invalid_argument("confusion_counts: sensitive length mismatch");

  ConfusionCounts c;
  if (s) {
    c.by_s0 = ConfusionCounts::Split{};
    c.by_s1 = ConfusionCounts::Split{};
  }
  for (Eigen::Index i = 0; i < y_true.size(); ++i) {
    const bool pos = y_true[i] == 1.0;
    const bool hat = y_pred[i] == 1.0;
    long ConfusionCounts::*field = pos ? (hat ? &ConfusionCounts::tp : &ConfusionCounts::fn)
                                       : (hat ? &ConfusionCounts::fp : &ConfusionCounts::tn);
    ++(c.*field);
    if (s) {
      auto& split = (*s)[i] == 1.0 ? *c.by_s1 : *c.by_s0;
      long ConfusionCounts::Split::*sf =
          pos ? (hat ? &ConfusionCounts::Split::tp : &ConfusionCounts::Split::fn)
              : (hat ? &ConfusionCounts::Split::fp : &ConfusionCounts::Split::tn);
      ++(split.*sf);
    }
  }
  return c;
}

namespace detail {
inline double ratio(long num, long den) {
  return den == 0 ? kUndefined : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace detail

/// Accuracy plus the four rates and recall. Rates with an empty denominator
/// come back as the undefined sentinel while the rest are still computed.
inline MetricsBundle final_metrics(const Vector& y_true, const Vector& y_pred) {
  MetricsBundle m;
  m.counts = confusion_counts(y_true, y_pred);
  const auto& c = m.counts;
  m.accuracy = detail::ratio(c.tp + c.tn, c.total());
  m.fpr = detail::ratio(c.fp, c.fp + c.tn);
  m.fnr = detail::ratio(c.fn, c.fn + c.tp);
  m.tpr = std::isnan(m.fnr) ? kUndefined : 1.0 - m.fnr;
  m.tnr = std::isnan(m.fpr) ? kUndefined : 1.0 - m.fpr;
  m.recall = m.tpr;
  return m;
}

/// Symmetrized disparate impact: 1 - min(di, 1/di) where di is the ratio of
/// positive-classification rates between the two sensitive categories.
/// Zero predicted positives on exactly one side is maximal unfairness (1);
/// on both sides the rates agree, so 0.
inline double disparate_impact(const Dataset& d, const Vector& y_pred, const std::string& sf) {
  const Vector& s = d.sensitive_column(sf);
  if (y_pred.size() != s.size()) throw std::invalid_argument("disparate_impact: length mismatch");
  long n0 = 0, n1 = 0, pos0 = 0, pos1 = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const bool in1 = s[i] == 1.0;
    (in1 ? n1 : n0)++;
    if (y_pred[i] == 1.0) (in1 ? pos1 : pos0)++;
  }
  if (n0 == 0 || n1 == 0)
    throw std::invalid_argument("disparate_impact: sensitive category '" + sf +
                                (n0 == 0 ? "'=0 is empty" : "'=1 is empty"));
  if (pos0 == 0 && pos1 == 0) return 0.0;
  if (pos0 == 0 || pos1 == 0) return 1.0;
  const double di = (static_cast<double>(pos0) / static_cast<double>(n0)) /
                    (static_cast<double>(pos1) / static_cast<double>(n1));
  return 1.0 - std::min(di, 1.0 / di);
}

enum class RateKind { FPR, FNR, TPR, TNR };

inline const char* rate_kind_name(RateKind k) {
  switch (k) {
    case RateKind::FPR: return "FPR";
    case RateKind::FNR: return "FNR";
    case RateKind::TPR: return "TPR";
    case RateKind::TNR: return "TNR";
  }
  return "?";
}

/// Absolute difference of a per-category rate between the sensitive groups.
inline double rate_gap(const Dataset& d, const Vector& y_true, const Vector& y_pred,
                       const std::string& sf, RateKind kind) {
  const Vector& s = d.sensitive_column(sf);
  ConfusionCounts c = confusion_counts(y_true, y_pred, &s);
  const auto& c0 = *c.by_s0;
  const auto& c1 = *c.by_s1;

  const bool needs_neg = kind == RateKind::FPR || kind == RateKind::TNR;
  const long den0 = needs_neg ? c0.fp + c0.tn : c0.fn + c0.tp;
  const long den1 = needs_neg ? c1.fp + c1.tn : c1.fn + c1.tp;
  if (den0 == 0 || den1 == 0)
    throw std::invalid_argument(std::string("rate_gap ") + rate_kind_name(kind) + ": no " +
                                (needs_neg ? "negative" : "positive") +
                                "-label rows with sensitive value " + (den0 == 0 ? "0" : "1"));

  // TPR and TNR derive from their error-rate complements, matching final_metrics
  double r0 = 0, r1 = 0;
  switch (kind) {
    case RateKind::FPR: r0 = detail::ratio(c0.fp, den0); r1 = detail::ratio(c1.fp, den1); break;
    case RateKind::TNR:
      r0 = 1.0 - detail::ratio(c0.fp, den0);
      r1 = 1.0 - detail::ratio(c1.fp, den1);
      break;
    case RateKind::FNR: r0 = detail::ratio(c0.fn, den0); r1 = detail::ratio(c1.fn, den1); break;
    case RateKind::TPR:
      r0 = 1.0 - detail::ratio(c0.fn, den0);
      r1 = 1.0 - detail::ratio(c1.fn, den1);
      break;
  }
  return std::abs(r0 - r1);
}

/// Mean of the FPR and FNR gaps.
inline double disparate_mistreatment(const Dataset& d, const Vector& y_true,
                                     const Vector& y_pred, const std::string& sf) {
  return 0.5 * (rate_gap(d, y_true, y_pred, sf, RateKind::FPR) +
                rate_gap(d, y_true, y_pred, sf, RateKind::FNR));
}

/// The fairness criteria a phase can target.
enum class FairnessMetric { DisparateImpact, DisparateMistreatment, FprGap, FnrGap };

inline const char* fairness_metric_name(FairnessMetric m) {
  switch (m) {
    case FairnessMetric::DisparateImpact: return "di";
    case FairnessMetric::DisparateMistreatment: return "dm";
    case FairnessMetric::FprGap: return "fpr";
    case FairnessMetric::FnrGap: return "fnr";
  }
  return "?";
}

inline FairnessMetric parse_fairness_metric(const std::string& name) {
  if (name == "di") return FairnessMetric::DisparateImpact;
  if (name == "dm") return FairnessMetric::DisparateMistreatment;
  if (name == "fpr") return FairnessMetric::FprGap;
  if (name == "fnr") return FairnessMetric::FnrGap;
  throw std::invalid_argument("unknown fairness metric: " + name +
                              " (expected di, dm, fpr, or fnr)");
}

inline double fairness_metric_value(FairnessMetric m, const Dataset& d, const Vector& y_true,
                                    const Vector& y_pred, const std::string& sf) {
  switch (m) {
    case FairnessMetric::DisparateImpact: return disparate_impact(d, y_pred, sf);
    case FairnessMetric::DisparateMistreatment: return disparate_mistreatment(d, y_true, y_pred, sf);
    case FairnessMetric::FprGap: return rate_gap(d, y_true, y_pred, sf, RateKind::FPR);
    case FairnessMetric::FnrGap: return rate_gap(d, y_true, y_pred, sf, RateKind::FNR);
  }
  throw std::logic_error("unreachable");
}

}  // namespace fairml
