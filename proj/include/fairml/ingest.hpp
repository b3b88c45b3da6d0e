#pragma once

#include "fairml/dataset.hpp"

#include <charconv>
#include <cstdlib>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fairml {

/// Columnar table of raw cells as read from CSV. Numeric interpretation
/// happens at ingest time; the group column stays categorical.
struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> cells; // column-major, cells[c][r]

  std::size_t rows() const { return cells.empty() ? 0 : cells[0].size(); }
  std::size_t cols() const { return names.size(); }

  int find(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }
};

enum class LabelCoding { PlusMinusOne, ZeroOne };

struct IngestSpec {
  std::optional<std::string> label_col;
  std::vector<std::string> sensitive_cols;
  std::optional<std::string> group_col;
  LabelCoding coding = LabelCoding::PlusMinusOne;
};

namespace detail {

inline double parse_real(const std::string& cell, const std::string& col) {
  const char* b = cell.data();
  const char* e = b + cell.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t' || *(e - 1) == '\r')) --e;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e)
    throw std::invalid_argument("column '" + col + "': cannot parse '" + cell + "' as a real number");
  return v;
}

inline Vector parse_column(const Table& t, int c) {
  Vector v(static_cast<Eigen::Index>(t.rows()));
  for (std::size_t r = 0; r < t.rows(); ++r)
    v[static_cast<Eigen::Index>(r)] = parse_real(t.cells[static_cast<std::size_t>(c)][r], t.names[static_cast<std::size_t>(c)]);
  return v;
}

// Shortest round-trip decimal form, so written files re-parse bit-exactly.
inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace detail

/// Builds a Dataset from a raw table: prepends the intercept column unless an
/// all-ones column already exists (which is moved to the front), recodes 0/1
/// labels to -1/+1, and registers sensitive columns both inside the design
/// matrix and in the named side map.
inline Dataset ingest_dataset(const Table& t, const IngestSpec& spec) {
  const auto n = static_cast<Eigen::Index>(t.rows());
  if (n == 0) throw std::invalid_argument("empty table");

  int label_idx = -1;
  if (spec.label_col) {
    label_idx = t.find(*spec.label_col);
    if (label_idx < 0) throw std::invalid_argument("label column not found: " + *spec.label_col);
  }
  int group_idx = -1;
  if (spec.group_col) {
    group_idx = t.find(*spec.group_col);
    if (group_idx < 0) throw std::invalid_argument("group column not found: " + *spec.group_col);
  }
  for (const auto& s : spec.sensitive_cols)
    if (t.find(s) < 0) throw std::invalid_argument("sensitive column not found: " + s);

  // All remaining columns are numeric features.
  std::vector<int> feat_cols;
  for (int c = 0; c < static_cast<int>(t.cols()); ++c)
    if (c != label_idx && c != group_idx) feat_cols.push_back(c);
  if (feat_cols.empty()) throw std::invalid_argument("no feature columns");

  std::vector<Vector> cols;
  cols.reserve(feat_cols.size());
  for (int c : feat_cols) cols.push_back(detail::parse_column(t, c));

  // Intercept: an exact all-ones column anywhere becomes column 0.
  int ones_pos = -1;
  for (std::size_t i = 0; i < cols.size(); ++i)
    if ((cols[i].array() == 1.0).all()) { ones_pos = static_cast<int>(i); break; }

  Dataset d;
  const auto p1 = static_cast<Eigen::Index>(cols.size() + (ones_pos < 0 ? 1 : 0));
  d.features.resize(n, p1);
  d.feature_names.reserve(static_cast<std::size_t>(p1));
  if (ones_pos < 0) {
    d.features.col(0) = Vector::Ones(n);
    d.feature_names.push_back("intercept");
  } else {
    d.features.col(0) = cols[static_cast<std::size_t>(ones_pos)];
    d.feature_names.push_back(t.names[static_cast<std::size_t>(feat_cols[static_cast<std::size_t>(ones_pos)])]);
  }
  Eigen::Index out = 1;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (static_cast<int>(i) == ones_pos) continue;
    d.features.col(out++) = cols[i];
    d.feature_names.push_back(t.names[static_cast<std::size_t>(feat_cols[i])]);
  }

  for (const auto& sname : spec.sensitive_cols) {
    Vector s = detail::parse_column(t, t.find(sname));
    if (!((s.array() == 0.0) || (s.array() == 1.0)).all())
      throw std::invalid_argument("sensitive column is not binary 0/1: " + sname);
    d.sensitive.emplace(sname, std::move(s));
  }

  if (label_idx >= 0) {
    Vector raw = detail::parse_column(t, label_idx);
    const double lo = spec.coding == LabelCoding::ZeroOne ? 0.0 : -1.0;
    std::set<double> distinct(raw.data(), raw.data() + raw.size());
    if (distinct.size() != 2)
      throw std::invalid_argument("label column must take exactly two distinct values");
    for (double v : distinct)
      if (v != lo && v != 1.0)
        throw std::invalid_argument("label value outside the declared coding");
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = raw[i] == 1.0 ? 1.0 : -1.0;
    d.labels = std::move(y);
  }

  if (group_idx >= 0) {
    const auto& raw = t.cells[static_cast<std::size_t>(group_idx)];
    std::vector<int> ids(raw.size());
    std::vector<std::string> levels;
    for (std::size_t r = 0; r < raw.size(); ++r) {
      std::string cell = raw[r];
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      if (cell.empty()) throw std::invalid_argument("empty group label at row " + std::to_string(r));
      int id = -1;
      for (std::size_t k = 0; k < levels.size(); ++k)
        if (levels[k] == cell) { id = static_cast<int>(k); break; }
      if (id < 0) {
        id = static_cast<int>(levels.size());
        levels.push_back(cell);
      }
      ids[r] = id;
    }
    d.group_ids = std::move(ids);
    d.group_levels = std::move(levels);
  }

  d.check();
  return d;
}

/// Inverse of ingest for round-tripping: all feature columns (intercept
/// included) plus label and group columns.
inline Table to_table(const Dataset& d, const std::string& label_name = "y",
                      const std::string& group_name = "group") {
  Table t;
  const auto n = static_cast<std::size_t>(d.rows());
  const auto& fmt = detail::format_double;
  for (Eigen::Index c = 0; c < d.cols(); ++c) {
    t.names.push_back(d.feature_names[static_cast<std::size_t>(c)]);
    std::vector<std::string> col(n);
    for (std::size_t r = 0; r < n; ++r) col[r] = fmt(d.features(static_cast<Eigen::Index>(r), c));
    t.cells.push_back(std::move(col));
  }
  if (d.labels) {
    t.names.push_back(label_name);
    std::vector<std::string> col(n);
    for (std::size_t r = 0; r < n; ++r) col[r] = fmt((*d.labels)[static_cast<Eigen::Index>(r)]);
    t.cells.push_back(std::move(col));
  }
  if (d.group_ids) {
    t.names.push_back(group_name);
    std::vector<std::string> col(n);
    for (std::size_t r = 0; r < n; ++r)
      col[r] = d.group_levels[static_cast<std::size_t>((*d.group_ids)[r])];
    t.cells.push_back(std::move(col));
  }
  return t;
}

}  // namespace fairml
