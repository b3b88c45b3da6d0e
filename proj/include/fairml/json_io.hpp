#pragma once

#include "fairml/metrics.hpp"
#include "fairml/objectives.hpp"
#include "fairml/pipeline.hpp"
#include "fairml/solver.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairml {

using Json = nlohmann::json;

namespace detail {

// JSON has no NaN; undefined metric values serialize as null.
inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace detail

inline Json coefficients_to_json(const Coefficients& coeffs, ModelFamily family) {
  Json j;
  j["family"] = model_family_name(family);
  j["beta"] = detail::vector_to_json(coeffs.beta);
  if (coeffs.group_effects) {
    j["group_effects"] = detail::vector_to_json(*coeffs.group_effects);
    j["group_levels"] = coeffs.group_levels;
  } else {
    j["group_effects"] = nullptr;
    j["group_levels"] = nullptr;
  }
  return j;
}

inline Coefficients coefficients_from_json(const Json& j) {
  Coefficients c;
  const auto& beta = j.at("beta");
  c.beta.resize(static_cast<Eigen::Index>(beta.size()));
  for (std::size_t i = 0; i < beta.size(); ++i)
    c.beta[static_cast<Eigen::Index>(i)] = beta[i].get<double>();
  if (j.contains("group_effects") && !j["group_effects"].is_null()) {
    const auto& ge = j["group_effects"];
    Vector g(static_cast<Eigen::Index>(ge.size()));
    for (std::size_t i = 0; i < ge.size(); ++i)
      g[static_cast<Eigen::Index>(i)] = ge[i].get<double>();
    c.group_effects = std::move(g);
    c.group_levels = j.at("group_levels").get<std::vector<std::string>>();
  }
  return c;
}

/// Flat classification report: headline rates plus the raw confusion counts.
inline Json metrics_to_json(const MetricsBundle& m) {
  Json j;
  j["accuracy"] = detail::finite_or_null(m.accuracy);
  j["fpr"] = detail::finite_or_null(m.fpr);
  j["fnr"] = detail::finite_or_null(m.fnr);
  j["tpr"] = detail::finite_or_null(m.tpr);
  j["tnr"] = detail::finite_or_null(m.tnr);
  j["recall"] = detail::finite_or_null(m.recall);
  j["tp"] = m.counts.tp;
  j["fp"] = m.counts.fp;
  j["tn"] = m.counts.tn;
  j["fn"] = m.counts.fn;
  return j;
}

inline Json feasibility_to_json(const FeasibilityReport& report) {
  Json rows = Json::array();
  for (const auto& row : report.rows) {
    Json r;
    r["sensitive"] = row.sensitive;
    r["constraint"] = row.fn == ConstraintFn::DI ? "di" : (row.fn == ConstraintFn::FNR ? "fnr" : "fpr");
    r["value"] = detail::finite_or_null(row.value);
    r["bound"] = row.bound;
    r["satisfied"] = row.satisfied;
    rows.push_back(std::move(r));
  }
  Json j;
  j["rows"] = std::move(rows);
  j["all_satisfied"] = report.all_satisfied;
  j["max_residual"] = detail::finite_or_null(report.max_residual);
  return j;
}

inline Json solution_to_json(const Solution& sol) {
  Json j;
  j["status"] = solve_status_name(sol.status);
  j["objective"] = detail::finite_or_null(sol.objective);
  j["iterations"] = sol.iterations;
  j["wall_seconds"] = sol.wall_seconds;
  j["feasibility"] = feasibility_to_json(sol.feasibility);
  return j;
}

inline Json cutoff_choice_to_json(const CutoffChoice& choice) {
  Json j;
  j["best"] = choice.best;
  j["baseline_accuracy"] = choice.baseline_accuracy;
  Json trace = Json::array();
  for (const auto& pt : choice.trace) {
    Json p;
    p["cutoff"] = pt.cutoff;
    p["accuracy"] = pt.accuracy;
    p["fairness"] = detail::finite_or_null(pt.fairness);
    p["admissible"] = pt.admissible;
    trace.push_back(std::move(p));
  }
  j["trace"] = std::move(trace);
  return j;
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return Json::parse(in);
}

}  // namespace fairml
