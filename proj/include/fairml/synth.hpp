#pragma once

#include "fairml/dataset.hpp"
#include "fairml/objectives.hpp"
#include "fairml/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairml {

/// Layout of the generated linear predictor: intercept first, i.i.d. standard
/// normal covariates in the middle, and the Bernoulli sensitive feature last.
struct SynthSpec {
  Eigen::Index n = 10000;
  Vector beta;                    // true coefficients, [intercept, x..., sensitive]
  ModelFamily family = ModelFamily::LogisticRegression;  // label mechanism
  double sensitive_prob = 0.5;    // P(s = 1)
  bool stochastic_labels = true;  // logistic families: Bernoulli(sigmoid(z)) vs sign(z)
  double train_fraction = 0.01;   // leading fraction of rows used for training
  std::uint64_t seed = 42;
  Eigen::Index groups = 100;      // mixed generation only
  double group_sd = 3.0;          // std. dev. of the true random intercepts
};

inline Vector default_regular_beta() {
  Vector b(5);
  b << -2.0, 0.4, 0.8, 0.5, 2.0;
  return b;
}

inline Vector default_mixed_beta() {
  Vector b(5);
  b << -4.0, 0.4, 0.8, 0.5, 4.0;
  return b;
}

struct SynthResult {
  Dataset train;
  Dataset test;
  Vector group_effects;  // true random intercepts (mixed generation), else empty
  std::vector<std::string> groups_train;  // group level per training row
  std::vector<std::string> groups_test;
};

namespace detail {

inline Eigen::Index checked_train_rows(const SynthSpec& spec) {
  if (spec.n < 2) throw std::invalid_argument("synth: need at least two rows");
  if (spec.beta.size() < 2)
    throw std::invalid_argument("synth: beta needs at least an intercept and a sensitive term");
  if (spec.sensitive_prob <= 0 || spec.sensitive_prob >= 1)
    throw std::invalid_argument("synth: sensitive probability must lie strictly in (0, 1)");
  if (spec.train_fraction <= 0 || spec.train_fraction >= 1)
    throw std::invalid_argument("synth: train fraction must lie strictly in (0, 1)");
  const auto t = static_cast<Eigen::Index>(
      std::llround(static_cast<double>(spec.n) * spec.train_fraction));
  if (t < 1 || t >= spec.n)
    throw std::invalid_argument("synth: train fraction leaves an empty train or test split");
  return t;
}

inline double synth_label(double z, const SynthSpec& spec, Rng& rng) {
  if (is_svm_family(spec.family)) return z >= 0 ? 1.0 : -1.0;
  if (spec.stochastic_labels) return rng.uniform01() < smooth::sigmoid(z) ? 1.0 : -1.0;
  return z >= 0 ? 1.0 : -1.0;
}

inline SynthResult split_synth(Dataset&& d, Eigen::Index t,
                               const std::vector<std::string>& row_groups) {
  SynthResult out;
  IndexList head(static_cast<std::size_t>(t)), tail(static_cast<std::size_t>(d.rows() - t));
  std::iota(head.begin(), head.end(), 0);
  std::iota(tail.begin(), tail.end(), t);
  out.train = d.select_rows(head);
  out.test = d.select_rows(tail);
  if (!row_groups.empty()) {
    out.groups_train.assign(row_groups.begin(), row_groups.begin() + t);
    out.groups_test.assign(row_groups.begin() + t, row_groups.end());
  }
  return out;
}

}  // namespace detail

/// Draws n rows of [1, x ~ N(0,1)..., s ~ Bernoulli] with labels from the true
/// linear predictor, then splits off the leading train_fraction as training
/// data. One seed fully determines both splits.
inline SynthResult gen_regular(const SynthSpec& spec) {
  const Eigen::Index t = detail::checked_train_rows(spec);
  const Eigen::Index k = spec.beta.size() - 2;  // plain covariates
  Rng rng(spec.seed);

  Matrix x(spec.n, spec.beta.size());
  Vector y(spec.n);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    x(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < k; ++j) x(i, 1 + j) = rng.normal();
    x(i, k + 1) = rng.bernoulli(spec.sensitive_prob) ? 1.0 : 0.0;
    y[i] = detail::synth_label(x.row(i).dot(spec.beta), spec, rng);
  }

  Dataset d;
  d.features = std::move(x);
  d.labels = std::move(y);
  d.sensitive["s"] = d.features.col(k + 1);
  d.feature_names.push_back("intercept");
  for (Eigen::Index j = 0; j < k; ++j) d.feature_names.push_back("x" + std::to_string(j + 1));
  d.feature_names.push_back("s");
  d.check();
  return detail::split_synth(std::move(d), t, {});
}

/// Mixed variant: adds a per-group random intercept g_i ~ N(0, group_sd^2) to
/// the linear predictor. Groups are assigned block round-robin — every run of
/// `groups` consecutive rows is a fresh permutation of all group levels — so
/// the training split covers every group whenever it has at least `groups`
/// rows (smaller training splits are rejected).
inline SynthResult gen_mixed(const SynthSpec& spec) {
  const Eigen::Index t = detail::checked_train_rows(spec);
  if (spec.groups < 1) throw std::invalid_argument("synth: need at least one group");
  if (spec.groups > spec.n) throw std::invalid_argument("synth: more groups than rows");
  if (t < spec.groups)
    throw std::invalid_argument(
        "synth: training split smaller than the number of groups; every group must be seen");
  if (spec.group_sd < 0) throw std::invalid_argument("synth: group std. dev. must be >= 0");
  const Eigen::Index k = spec.beta.size() - 2;
  Rng rng(spec.seed);

  Vector g(spec.groups);
  for (Eigen::Index i = 0; i < spec.groups; ++i) g[i] = rng.normal(0.0, spec.group_sd);

  std::vector<int> block(static_cast<std::size_t>(spec.groups));
  std::iota(block.begin(), block.end(), 0);

  Matrix x(spec.n, spec.beta.size());
  Vector y(spec.n);
  std::vector<int> gid(static_cast<std::size_t>(spec.n));
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    if (i % spec.groups == 0) rng.shuffle(block);
    gid[static_cast<std::size_t>(i)] = block[static_cast<std::size_t>(i % spec.groups)];
    x(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < k; ++j) x(i, 1 + j) = rng.normal();
    x(i, k + 1) = rng.bernoulli(spec.sensitive_prob) ? 1.0 : 0.0;
    const double z = x.row(i).dot(spec.beta) + g[gid[static_cast<std::size_t>(i)]];
    y[i] = detail::synth_label(z, spec, rng);
  }

  Dataset d;
  d.features = std::move(x);
  d.labels = std::move(y);
  d.sensitive["s"] = d.features.col(k + 1);
  d.feature_names.push_back("intercept");
  for (Eigen::Index j = 0; j < k; ++j) d.feature_names.push_back("x" + std::to_string(j + 1));
  d.feature_names.push_back("s");
  d.group_ids = std::move(gid);
  for (Eigen::Index i = 0; i < spec.groups; ++i) d.group_levels.push_back(std::to_string(i + 1));
  d.check();

  std::vector<std::string> row_groups(static_cast<std::size_t>(spec.n));
  for (Eigen::Index i = 0; i < spec.n; ++i)
    row_groups[static_cast<std::size_t>(i)] =
        d.group_levels[static_cast<std::size_t>((*d.group_ids)[static_cast<std::size_t>(i)])];

  SynthResult out = detail::split_synth(std::move(d), t, row_groups);
  out.group_effects = std::move(g);
  return out;
}

}  // namespace fairml
