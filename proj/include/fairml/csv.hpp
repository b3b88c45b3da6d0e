#pragma once

#include "fairml/ingest.hpp"

#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace fairml {

// Comma-separated, header row required, '.' decimal, no quoting.

inline Table read_csv(std::istream& in) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream hs(line);
  std::string field;
  while (std::getline(hs, field, ',')) t.names.push_back(field);
  if (t.names.empty()) throw std::invalid_argument("csv: empty header row");
  t.cells.resize(t.names.size());

  std::size_t row = 1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t c = 0, start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        if (c >= t.names.size())
          throw std::invalid_argument("csv: too many fields at data row " + std::to_string(row));
        t.cells[c++].push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (c != t.names.size())
      throw std::invalid_argument("csv: wrong field count at data row " + std::to_string(row));
    ++row;
  }
  return t;
}

inline Table read_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return read_csv(f);
}

inline void write_csv(std::ostream& out, const Table& t) {
  for (std::size_t c = 0; c < t.names.size(); ++c)
    out << (c ? "," : "") << t.names[c];
  out << "\n";
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.cells.size(); ++c)
      out << (c ? "," : "") << t.cells[c][r];
    out << "\n";
  }
}

/// Dataset to CSV: feature columns without the intercept, then label and
/// group columns when present.
inline void write_dataset_csv(std::ostream& out, const Dataset& d,
                              const std::string& label_name = "y",
                              const std::string& group_name = "group") {
  Table t = to_table(d, label_name, group_name);
  Table trimmed;
  for (std::size_t c = 0; c < t.names.size(); ++c) {
    if (c == 0) continue; // intercept
    trimmed.names.push_back(t.names[c]);
    trimmed.cells.push_back(std::move(t.cells[c]));
  }
  write_csv(out, trimmed);
}

inline void write_dataset_csv_file(const std::string& path, const Dataset& d,
                                   const std::string& label_name = "y",
                                   const std::string& group_name = "group") {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  write_dataset_csv(f, d, label_name, group_name);
}

}  // namespace fairml
