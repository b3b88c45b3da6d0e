#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairml {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexList = std::vector<Eigen::Index>;

/// Training or scoring data. The design matrix always carries an all-ones
/// intercept as column 0; labels are -1/+1 and may be absent for data that is
/// only scored. Sensitive features are binary 0/1 columns kept both inside the
/// design matrix and in a named side map. Immutable by convention once built.
struct Dataset {
  Matrix features;                           // n x (p+1), column 0 == 1
  std::optional<Vector> labels;              // entries in {-1, +1}
  std::map<std::string, Vector> sensitive;   // name -> 0/1 column
  std::optional<std::vector<int>> group_ids; // per-row group index in [0, K)
  std::vector<std::string> group_levels;     // group names, size K
  std::vector<std::string> feature_names;    // size p+1

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }
  int num_groups() const { return static_cast<int>(group_levels.size()); }

  const Vector& sensitive_column(const std::string& name) const {
    auto it = sensitive.find(name);
    if (it == sensitive.end())
      throw std::invalid_argument("unknown sensitive feature: " + name);
    return it->second;
  }

  Dataset with_labels(Vector y) const {
    Dataset out = *this;
    out.labels = std::move(y);
    out.check();
    return out;
  }

  /// Row subset (indices may repeat; resampling relies on that).
  Dataset select_rows(const IndexList& idx) const {
    Dataset out;
    const auto m = static_cast<Eigen::Index>(idx.size());
    out.features.resize(m, features.cols());
    for (Eigen::Index i = 0; i < m; ++i) out.features.row(i) = features.row(idx[i]);
    if (labels) {
      Vector y(m);
      for (Eigen::Index i = 0; i < m; ++i) y[i] = (*labels)[idx[i]];
      out.labels = std::move(y);
    }
    for (const auto& [name, col] : sensitive) {
      Vector s(m);
      for (Eigen::Index i = 0; i < m; ++i) s[i] = col[idx[i]];
      out.sensitive.emplace(name, std::move(s));
    }
    if (group_ids) {
      std::vector<int> g(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) g[i] = (*group_ids)[idx[i]];
      out.group_ids = std::move(g);
      out.group_levels = group_levels;
    }
    out.feature_names = feature_names;
    return out;
  }

  /// Validates the structural invariants; throws std::invalid_argument.
  void check() const {
    const Eigen::Index n = rows();
    if (cols() < 1) throw std::invalid_argument("dataset needs at least the intercept column");
    if ((features.col(0).array() != 1.0).any())
      throw std::invalid_argument("column 0 must be identically 1");
    if (static_cast<Eigen::Index>(feature_names.size()) != cols())
      throw std::invalid_argument("feature_names size does not match column count");
    if (labels) {
      if (labels->size() != n) throw std::invalid_argument("label length mismatch");
      if (!((labels->array() == 1.0) || (labels->array() == -1.0)).all())
        throw std::invalid_argument("labels must be -1 or +1");
    }
    for (const auto& [name, col] : sensitive) {
      if (col.size() != n) throw std::invalid_argument("sensitive column length mismatch: " + name);
      if (!((col.array() == 0.0) || (col.array() == 1.0)).all())
        throw std::invalid_argument("sensitive feature is not binary 0/1: " + name);
    }
    if (group_ids) {
      if (static_cast<Eigen::Index>(group_ids->size()) != n)
        throw std::invalid_argument("group id length mismatch");
      const int k = num_groups();
      if (k == 0) throw std::invalid_argument("group levels missing");
      std::vector<bool> seen(static_cast<std::size_t>(k), false);
      for (int g : *group_ids) {
        if (g < 0 || g >= k) throw std::invalid_argument("group id out of range");
        seen[static_cast<std::size_t>(g)] = true;
      }
      for (int i = 0; i < k; ++i)
        if (!seen[static_cast<std::size_t>(i)])
          throw std::invalid_argument("empty group: " + group_levels[static_cast<std::size_t>(i)]);
    }
  }
};

/// The eight index sets induced by one sensitive feature and the labels.
struct SubsetOctet {
  IndexList s0, s1;   // sensitive == 0 / == 1
  IndexList pos, neg; // label == +1 / == -1
  IndexList dp0, dp1; // positives within s0 / s1
  IndexList dn0, dn1; // negatives within s0 / s1
};

/// Octet over the whole dataset plus, in grouped mode, one octet per group.
struct Partition {
  SubsetOctet all;
  std::vector<SubsetOctet> per_group;
};

namespace detail {

inline SubsetOctet octet_of(const Dataset& d, const Vector& s, const Vector& y,
                            const IndexList& rows) {
  SubsetOctet o;
  for (Eigen::Index r : rows) {
    const bool s1 = s[r] == 1.0;
    const bool pos = y[r] == 1.0;
    (s1 ? o.s1 : o.s0).push_back(r);
    (pos ? o.pos : o.neg).push_back(r);
    if (pos)
      (s1 ? o.dp1 : o.dp0).push_back(r);
    else
      (s1 ? o.dn1 : o.dn0).push_back(r);
  }
  (void)d;
  return o;
}

}  // namespace detail

/// Splits rows into the label/sensitive-category subsets; with grouped set,
/// additionally one octet per group.
inline Partition partition(const Dataset& d, const std::string& sf, bool grouped = false) {
  if (!d.labels) throw std::invalid_argument("partition requires labels");
  const Vector& s = d.sensitive_column(sf);
  const Vector& y = *d.labels;

  IndexList all_rows(static_cast<std::size_t>(d.rows()));
  for (Eigen::Index i = 0; i < d.rows(); ++i) all_rows[static_cast<std::size_t>(i)] = i;

  Partition p;
  p.all = detail::octet_of(d, s, y, all_rows);
  if (grouped) {
    if (!d.group_ids) throw std::invalid_argument("grouped partition requires group ids");
    std::vector<IndexList> rows_by_group(static_cast<std::size_t>(d.num_groups()));
    for (Eigen::Index i = 0; i < d.rows(); ++i)
      rows_by_group[static_cast<std::size_t>((*d.group_ids)[static_cast<std::size_t>(i)])].push_back(i);
    p.per_group.reserve(rows_by_group.size());
    for (const auto& rows : rows_by_group) p.per_group.push_back(detail::octet_of(d, s, y, rows));
  }
  return p;
}

}  // namespace fairml
