#pragma once

#include "fairml/dataset.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairml {

enum class ModelFamily { LogisticRegression, Svm, MixedLogisticRegression, MixedSvm };
enum class ConstraintFamily { None, DisparateImpact, FalseNegativeRate, FalsePositiveRate, DisparateMistreatment };

inline bool is_mixed(ModelFamily f) {
  return f == ModelFamily::MixedLogisticRegression || f == ModelFamily::MixedSvm;
}
inline bool is_svm_family(ModelFamily f) {
  return f == ModelFamily::Svm || f == ModelFamily::MixedSvm;
}

inline const char* model_family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::LogisticRegression: return "lr";
    case ModelFamily::Svm: return "svm";
    case ModelFamily::MixedLogisticRegression: return "melr";
    case ModelFamily::MixedSvm: return "mesvm";
  }
  return "unknown";
}

inline ModelFamily parse_model_family(const std::string& name) {
  if (name == "lr") return ModelFamily::LogisticRegression;
  if (name == "svm") return ModelFamily::Svm;
  if (name == "melr") return ModelFamily::MixedLogisticRegression;
  if (name == "mesvm") return ModelFamily::MixedSvm;
  throw std::invalid_argument("unknown model family: " + name +
                              " (expected lr, svm, melr, or mesvm)");
}

inline const char* constraint_family_name(ConstraintFamily c) {
  switch (c) {
    case ConstraintFamily::None: return "none";
    case ConstraintFamily::DisparateImpact: return "di";
    case ConstraintFamily::FalseNegativeRate: return "fnr";
    case ConstraintFamily::FalsePositiveRate: return "fpr";
    case ConstraintFamily::DisparateMistreatment: return "dm";
  }
  return "unknown";
}

inline ConstraintFamily parse_constraint_family(const std::string& name) {
  if (name == "none") return ConstraintFamily::None;
  if (name == "di") return ConstraintFamily::DisparateImpact;
  if (name == "fnr") return ConstraintFamily::FalseNegativeRate;
  if (name == "fpr") return ConstraintFamily::FalsePositiveRate;
  if (name == "dm") return ConstraintFamily::DisparateMistreatment;
  throw std::invalid_argument("unknown constraint family: " + name +
                              " (expected none, di, fnr, fpr, or dm)");
}

/// One in-processing problem: model family, constraint family, and the knobs.
/// Constraints are replicated per sensitive feature name.
struct ModelSpec {
  ModelFamily family = ModelFamily::LogisticRegression;
  ConstraintFamily constraint = ConstraintFamily::None;
  std::vector<std::string> sensitive_features;
  double fairness_threshold = 0.1; // c, bound on each constraint value
  double slack_weight = 1.0;       // weight on the hinge sum (SVM families)
  double group_penalty = 1.0;      // ridge weight on random effects (mixed families)
};

/// Fitted parameters: fixed coefficients, plus per-group random intercepts for
/// mixed families. group_levels records the training group names so that new
/// data can be aligned (unseen groups get effect 0).
struct Coefficients {
  Vector beta;
  std::optional<Vector> group_effects;
  std::vector<std::string> group_levels;
};

struct ValueGrad {
  double value = 0.0;
  Vector grad;
};

namespace smooth {

inline double softplus(double u) {
  return u > 0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

inline double sigmoid(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// max(0, w), smoothed to tau*softplus(w/tau) for tau > 0
inline double hinge(double w, double tau) {
  if (tau <= 0) return w > 0 ? w : 0.0;
  return tau * softplus(w / tau);
}
inline double hinge_deriv(double w, double tau) {
  if (tau <= 0) return w > 0 ? 1.0 : 0.0;
  return sigmoid(w / tau);
}

// min(0, u), smoothed to -tau*softplus(-u/tau) for tau > 0
inline double neg_part(double u, double tau) {
  if (tau <= 0) return u < 0 ? u : 0.0;
  return -tau * softplus(-u / tau);
}
inline double neg_part_deriv(double u, double tau) {
  if (tau <= 0) return u < 0 ? 1.0 : 0.0;
  return sigmoid(-u / tau);
}

}  // namespace smooth

namespace detail {

inline Vector train_linear_predictor(const Dataset& d, const Vector& beta,
                                     const std::optional<Vector>& g) {
  Vector lp = d.features * beta;
  if (g) {
    if (!d.group_ids) throw std::invalid_argument("random effects given but data has no groups");
    if (g->size() != d.num_groups())
      throw std::invalid_argument("random-effect vector does not match the number of groups");
    for (Eigen::Index i = 0; i < lp.size(); ++i)
      lp[i] += (*g)[(*d.group_ids)[static_cast<std::size_t>(i)]];
  }
  return lp;
}

// Negative log-likelihood sum over rows: softplus(-y * lp), stable for all lp.
// d(loss)/d(lp_i) is written into dlp.
inline double logistic_loss(const Vector& y, const Vector& lp, Vector& dlp) {
  double value = 0.0;
  for (Eigen::Index i = 0; i < lp.size(); ++i) {
    const double z = y[i] * lp[i];
    value += smooth::softplus(-z);
    dlp[i] = -y[i] * smooth::sigmoid(-z);
  }
  return value;
}

// 0.5*||beta||^2 + mu * sum hinge(1 - y*lp); hinge smoothed when tau > 0.
inline double svm_loss(const Vector& beta, const Vector& y, const Vector& lp, double mu,
                       double tau, Vector& dlp) {
  double value = 0.5 * beta.squaredNorm();
  for (Eigen::Index i = 0; i < lp.size(); ++i) {
    const double w = 1.0 - y[i] * lp[i];
    value += mu * smooth::hinge(w, tau);
    dlp[i] = -mu * y[i] * smooth::hinge_deriv(w, tau);
  }
  return value;
}

// grad wrt (beta [, g]) from the per-row derivative dlp; adds ridge on g.
inline Vector assemble_grad(const Dataset& d, const Vector& dlp, const std::optional<Vector>& g,
                            double group_penalty, const Vector* beta_ridge = nullptr) {
  const Eigen::Index p1 = d.cols();
  const Eigen::Index k = g ? g->size() : 0;
  Vector grad = Vector::Zero(p1 + k);
  grad.head(p1) = d.features.transpose() * dlp;
  if (beta_ridge) grad.head(p1) += *beta_ridge;
  if (g) {
    for (Eigen::Index i = 0; i < dlp.size(); ++i)
      grad[p1 + (*d.group_ids)[static_cast<std::size_t>(i)]] += dlp[i];
    grad.tail(k) += 2.0 * group_penalty * (*g);
  }
  return grad;
}

inline void require_labels(const Dataset& d, const char* who) {
  if (!d.labels) throw std::invalid_argument(std::string(who) + ": data has no labels");
}

}  // namespace detail

/// Logistic regression negative log-likelihood and gradient.
inline ValueGrad lr_objective(const Vector& beta, const Dataset& d) {
  detail::require_labels(d, "lr_objective");
  const Vector lp = d.features * beta;
  Vector dlp(lp.size());
  ValueGrad out;
  out.value = detail::logistic_loss(*d.labels, lp, dlp);
  out.grad = d.features.transpose() * dlp;
  return out;
}

/// Primal SVM objective with slack eliminated into the hinge. The gradient is
/// a subgradient at hinge kinks.
inline ValueGrad svm_objective(const Vector& beta, const Dataset& d, double slack_weight) {
  detail::require_labels(d, "svm_objective");
  const Vector lp = d.features * beta;
  Vector dlp(lp.size());
  ValueGrad out;
  out.value = detail::svm_loss(beta, *d.labels, lp, slack_weight, 0.0, dlp);
  out.grad = d.features.transpose() * dlp + beta;
  return out;
}

/// Mixed-effects logistic regression: logistic loss on beta'x + g_i plus a
/// ridge penalty on the random intercepts. Gradient over concatenated (beta, g).
inline ValueGrad melr_objective(const Vector& beta, const Vector& g, const Dataset& d,
                                double group_penalty) {
  detail::require_labels(d, "melr_objective");
  std::optional<Vector> ge(g);
  const Vector lp = detail::train_linear_predictor(d, beta, ge);
  Vector dlp(lp.size());
  ValueGrad out;
  out.value = detail::logistic_loss(*d.labels, lp, dlp) + group_penalty * g.squaredNorm();
  out.grad = detail::assemble_grad(d, dlp, ge, group_penalty);
  return out;
}

/// Mixed-effects SVM; ||beta||^2 excludes the random effects.
inline ValueGrad mesvm_objective(const Vector& beta, const Vector& g, const Dataset& d,
                                 double slack_weight, double group_penalty) {
  detail::require_labels(d, "mesvm_objective");
  std::optional<Vector> ge(g);
  const Vector lp = detail::train_linear_predictor(d, beta, ge);
  Vector dlp(lp.size());
  ValueGrad out;
  out.value = detail::svm_loss(beta, *d.labels, lp, slack_weight, 0.0, dlp) +
              group_penalty * g.squaredNorm();
  out.grad = detail::assemble_grad(d, dlp, ge, group_penalty, &beta);
  return out;
}

/// Mean of (s - s_bar) times the linear predictor; the constrained problems
/// bound its magnitude by c. Linear in (beta, g).
inline double di_constraint_value(const Vector& beta, const std::optional<Vector>& g,
                                  const Dataset& d, const std::string& sf) {
  const Vector& s = d.sensitive_column(sf);
  const Vector lp = detail::train_linear_predictor(d, beta, g);
  const double s_bar = s.mean();
  return (s.array() - s_bar).matrix().dot(lp) / static_cast<double>(d.rows());
}

/// Difference of category-weighted sums of min(0, lp) over the positives of
/// each sensitive category; only false negatives contribute.
inline double fnr_constraint_value(const Vector& beta, const std::optional<Vector>& g,
                                   const Dataset& d, const std::string& sf) {
  detail::require_labels(d, "fnr_constraint_value");
  const Partition p = partition(d, sf);
  const Vector lp = detail::train_linear_predictor(d, beta, g);
  const double n = static_cast<double>(d.rows());
  const double w0 = static_cast<double>(p.all.s0.size()) / n;
  const double w1 = static_cast<double>(p.all.s1.size()) / n;
  double acc = 0.0;
  for (Eigen::Index r : p.all.dp1) acc += w0 * smooth::neg_part(lp[r], 0.0);
  for (Eigen::Index r : p.all.dp0) acc -= w1 * smooth::neg_part(lp[r], 0.0);
  return acc;
}

/// Mirror of the FNR form over the negatives with the predictor sign flipped;
/// only false positives contribute.
inline double fpr_constraint_value(const Vector& beta, const std::optional<Vector>& g,
                                   const Dataset& d, const std::string& sf) {
  detail::require_labels(d, "fpr_constraint_value");
  const Partition p = partition(d, sf);
  const Vector lp = detail::train_linear_predictor(d, beta, g);
  const double n = static_cast<double>(d.rows());
  const double w0 = static_cast<double>(p.all.s0.size()) / n;
  const double w1 = static_cast<double>(p.all.s1.size()) / n;
  double acc = 0.0;
  for (Eigen::Index r : p.all.dn1) acc += w0 * smooth::neg_part(-lp[r], 0.0);
  for (Eigen::Index r : p.all.dn0) acc -= w1 * smooth::neg_part(-lp[r], 0.0);
  return acc;
}

enum class ConstraintFn { DI, FNR, FPR };

struct ConstraintDescriptor {
  std::string sensitive;
  ConstraintFn fn;
};

/// A fully assembled in-processing problem: objective plus two-sided fairness
/// constraints, ready for the solver. Evaluators take the packed parameter
/// vector [beta; g] and an optional smoothing width tau (0 = exact forms).
class Problem {
 public:
  ModelSpec spec;
  Dataset data;
  std::map<std::string, Partition> partitions;
  std::vector<ConstraintDescriptor> constraints;

  Eigen::Index beta_dim() const { return data.cols(); }
  Eigen::Index effect_dim() const { return is_mixed(spec.family) ? data.num_groups() : 0; }
  Eigen::Index dim() const { return beta_dim() + effect_dim(); }
  int num_value_functions() const { return static_cast<int>(constraints.size()); }
  int inequality_count() const { return 2 * num_value_functions(); }
  double bound() const { return spec.fairness_threshold; }

  Coefficients unpack(const Vector& theta) const {
    Coefficients c;
    c.beta = theta.head(beta_dim());
    if (is_mixed(spec.family)) {
      c.group_effects = theta.tail(effect_dim());
      c.group_levels = data.group_levels;
    }
    return c;
  }

  Vector pack(const Coefficients& c) const {
    Vector theta = Vector::Zero(dim());
    if (c.beta.size() != beta_dim()) throw std::invalid_argument("pack: beta width mismatch");
    theta.head(beta_dim()) = c.beta;
    if (is_mixed(spec.family)) {
      if (!c.group_effects || c.group_effects->size() != effect_dim())
        throw std::invalid_argument("pack: random-effect width mismatch");
      theta.tail(effect_dim()) = *c.group_effects;
    }
    return theta;
  }

  double objective(const Vector& theta, Vector* grad, double tau) const {
    const Vector beta = theta.head(beta_dim());
    std::optional<Vector> g;
    if (is_mixed(spec.family)) g = Vector(theta.tail(effect_dim()));
    const Vector lp = detail::train_linear_predictor(data, beta, g);
    Vector dlp(lp.size());
    double value;
    if (is_svm_family(spec.family)) {
      value = detail::svm_loss(beta, *data.labels, lp, spec.slack_weight, tau, dlp);
    } else {
      value = detail::logistic_loss(*data.labels, lp, dlp);
    }
    if (g) value += spec.group_penalty * g->squaredNorm();
    if (grad) {
      const Vector* ridge = is_svm_family(spec.family) ? &beta : nullptr;
      *grad = detail::assemble_grad(data, dlp, g, spec.group_penalty, ridge);
    }
    return value;
  }

  /// Value function k (the two inequalities are value <= c and value >= -c).
  double constraint_value(int k, const Vector& theta, Vector* grad, double tau) const {
    const auto& desc = constraints.at(static_cast<std::size_t>(k));
    const Vector beta = theta.head(beta_dim());
    std::optional<Vector> g;
    if (is_mixed(spec.family)) g = Vector(theta.tail(effect_dim()));
    const Vector lp = detail::train_linear_predictor(data, beta, g);
    const Partition& part = partitions.at(desc.sensitive);
    const double n = static_cast<double>(data.rows());

    Vector dlp = Vector::Zero(lp.size());
    double value = 0.0;
    switch (desc.fn) {
      case ConstraintFn::DI: {
        const Vector& s = data.sensitive_column(desc.sensitive);
        const double s_bar = s.mean();
        for (Eigen::Index i = 0; i < lp.size(); ++i) {
          const double a = (s[i] - s_bar) / n;
          value += a * lp[i];
          dlp[i] = a;
        }
        break;
      }
      case ConstraintFn::FNR: {
        const double w0 = static_cast<double>(part.all.s0.size()) / n;
        const double w1 = static_cast<double>(part.all.s1.size()) / n;
        for (Eigen::Index r : part.all.dp1) {
          value += w0 * smooth::neg_part(lp[r], tau);
          dlp[r] = w0 * smooth::neg_part_deriv(lp[r], tau);
        }
        for (Eigen::Index r : part.all.dp0) {
          value -= w1 * smooth::neg_part(lp[r], tau);
          dlp[r] = -w1 * smooth::neg_part_deriv(lp[r], tau);
        }
        break;
      }
      case ConstraintFn::FPR: {
        const double w0 = static_cast<double>(part.all.s0.size()) / n;
        const double w1 = static_cast<double>(part.all.s1.size()) / n;
        for (Eigen::Index r : part.all.dn1) {
          value += w0 * smooth::neg_part(-lp[r], tau);
          dlp[r] = -w0 * smooth::neg_part_deriv(-lp[r], tau);
        }
        for (Eigen::Index r : part.all.dn0) {
          value -= w1 * smooth::neg_part(-lp[r], tau);
          dlp[r] = w1 * smooth::neg_part_deriv(-lp[r], tau);
        }
        break;
      }
    }
    if (grad) *grad = detail::assemble_grad(data, dlp, g, 0.0);
    return value;
  }

  bool has_nonsmooth_terms() const {
    if (is_svm_family(spec.family)) return true;
    for (const auto& c : constraints)
      if (c.fn != ConstraintFn::DI) return true;
    return false;
  }
};

/// Validates spec/data compatibility and expands the constraint family into
/// per-sensitive-feature descriptors (DM becomes an FNR + FPR pair).
inline Problem assemble_problem(const ModelSpec& spec, const Dataset& d) {
  if (spec.fairness_threshold < 0) throw std::invalid_argument("fairness threshold must be >= 0");
  if (spec.slack_weight <= 0) throw std::invalid_argument("slack weight must be > 0");
  if (spec.group_penalty <= 0) throw std::invalid_argument("group penalty must be > 0");
  if (is_mixed(spec.family) && !d.group_ids)
    throw std::invalid_argument("mixed model requires group ids");
  detail::require_labels(d, "assemble_problem");

  Problem p;
  p.spec = spec;
  p.data = d;
  if (spec.constraint != ConstraintFamily::None) {
    if (spec.sensitive_features.empty())
      throw std::invalid_argument("constrained problem needs at least one sensitive feature");
    for (const auto& sf : spec.sensitive_features) {
      if (!d.sensitive.count(sf))
        throw std::invalid_argument("sensitive feature not in data: " + sf);
      // Summing the category-weighted terms over every group reproduces the
      // global sums, so one global partition serves mixed and plain models.
      p.partitions.emplace(sf, partition(d, sf));
      switch (spec.constraint) {
        case ConstraintFamily::DisparateImpact:
          p.constraints.push_back({sf, ConstraintFn::DI});
          break;
        case ConstraintFamily::FalseNegativeRate:
          p.constraints.push_back({sf, ConstraintFn::FNR});
          break;
        case ConstraintFamily::FalsePositiveRate:
          p.constraints.push_back({sf, ConstraintFn::FPR});
          break;
        case ConstraintFamily::DisparateMistreatment:
          p.constraints.push_back({sf, ConstraintFn::FNR});
          p.constraints.push_back({sf, ConstraintFn::FPR});
          break;
        case ConstraintFamily::None: break;
      }
    }
  }
  return p;
}

/// Class-membership probabilities for new data. Logistic link on the linear
/// predictor for every family, so downstream thresholding is uniform; SVM
/// margins keep their ordering. Mixed families add the group effect, with
/// unseen groups scored at the prior mean 0.
inline Vector predict_proba(const Coefficients& coeffs, const Dataset& d, ModelFamily family) {
  if (d.cols() != coeffs.beta.size())
    throw std::invalid_argument("predict_proba: feature width does not match coefficients");
  Vector lp = d.features * coeffs.beta;
  if (is_mixed(family)) {
    if (!coeffs.group_effects) throw std::invalid_argument("mixed family without random effects");
    if (!d.group_ids) throw std::invalid_argument("mixed prediction requires group ids");
    // align by level name; unseen level -> effect 0
    std::vector<int> remap(d.group_levels.size(), -1);
    for (std::size_t i = 0; i < d.group_levels.size(); ++i)
      for (std::size_t j = 0; j < coeffs.group_levels.size(); ++j)
        if (coeffs.group_levels[j] == d.group_levels[i]) { remap[i] = static_cast<int>(j); break; }
    for (Eigen::Index r = 0; r < lp.size(); ++r) {
      const int tr = remap[static_cast<std::size_t>((*d.group_ids)[static_cast<std::size_t>(r)])];
      if (tr >= 0) lp[r] += (*coeffs.group_effects)[tr];
    }
  }
  Vector probs(lp.size());
  for (Eigen::Index i = 0; i < lp.size(); ++i) probs[i] = smooth::sigmoid(lp[i]);
  return probs;
}

}  // namespace fairml
