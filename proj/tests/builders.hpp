#pragma once

// Small helpers for assembling inline datasets in tests.

#include "fairml/dataset.hpp"

#include <string>
#include <vector>

namespace builders {

using fairml::Dataset;
using fairml::Matrix;
using fairml::Vector;

inline Vector vec(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

/// Dataset with intercept, one covariate column x, and sensitive feature s
/// (s is also the last design-matrix column). Labels optional.
inline Dataset tiny(const std::vector<double>& x, const std::vector<double>& s,
                    const std::vector<double>& y = {}) {
  Dataset d;
  const auto n = static_cast<Eigen::Index>(x.size());
  d.features.resize(n, 3);
  d.features.col(0) = Vector::Ones(n);
  d.features.col(1) = vec(x);
  d.features.col(2) = vec(s);
  d.feature_names = {"intercept", "x", "s"};
  d.sensitive.emplace("s", vec(s));
  if (!y.empty()) d.labels = vec(y);
  d.check();
  return d;
}

/// Adds group structure: ids in [0, k) with levels "g0".."g[k-1]".
inline Dataset with_groups(Dataset d, const std::vector<int>& ids, int k) {
  d.group_ids = ids;
  d.group_levels.clear();
  for (int i = 0; i < k; ++i) d.group_levels.push_back("g" + std::to_string(i));
  d.check();
  return d;
}

}  // namespace builders
