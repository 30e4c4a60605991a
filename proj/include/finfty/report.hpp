#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "finfty/grid.hpp"
#include "finfty/version.hpp"

namespace finfty {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

inline LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("linear_fit: need at least two matched points");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double pred = f.slope * xs[i] + f.intercept;
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
  }
  f.r2 = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return f;
}

inline json to_json(const LinearFit& f) {
  return json{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
}

// One measured inequality instance.  A trial is degenerate when the
// right-hand side is numerically indistinguishable from zero relative to the
// left; degenerate trials carry no ratio information and are counted, never
// maximized over.
struct RatioTrial {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool degenerate = false;
  json params;
};

inline RatioTrial make_ratio_trial(double lhs, double rhs, json params = nullptr) {
  RatioTrial t;
  t.lhs = lhs;
  t.rhs = rhs;
  t.params = std::move(params);
  t.degenerate = rhs < 1e-14 * (lhs + 1.0);
  t.ratio = t.degenerate ? 0.0 : lhs / rhs;
  return t;
}

// Empirical-constant report: every claimed bound is published as the observed
// sup of lhs/rhs over the trial set, alongside the trials themselves.
struct RatioReport {
  std::string name;
  std::vector<RatioTrial> trials;
  json meta;

  std::size_t degenerate_count() const {
    std::size_t n = 0;
    for (const auto& t : trials) n += t.degenerate ? 1 : 0;
    return n;
  }

  double max_ratio() const {
    double m = 0.0;
    for (const auto& t : trials)
      if (!t.degenerate && t.ratio > m) m = t.ratio;
    return m;
  }

  double min_ratio() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& t : trials)
      if (!t.degenerate && t.ratio < m) m = t.ratio;
    return std::isfinite(m) ? m : 0.0;
  }
};

inline json to_json(const RatioReport& r) {
  json j;
  j["schema"] = kArtifactSchema;
  j["kind"] = "ratio_report";
  j["name"] = r.name;
  j["max_ratio"] = r.max_ratio();
  j["min_ratio"] = r.min_ratio();
  j["trials_total"] = r.trials.size();
  j["trials_degenerate"] = r.degenerate_count();
  if (!r.meta.is_null()) j["meta"] = r.meta;
  json arr = json::array();
  for (const auto& t : r.trials) {
    json tj;
    tj["lhs"] = t.lhs;
    tj["rhs"] = t.rhs;
    tj["ratio"] = t.ratio;
    tj["degenerate"] = t.degenerate;
    if (!t.params.is_null()) tj["params"] = t.params;
    arr.push_back(std::move(tj));
  }
  j["trials"] = std::move(arr);
  return j;
}

// Growth-law report: (x, y) table plus the fit the claim is judged by.
struct GrowthReport {
  std::string name;
  std::vector<double> xs, ys;
  LinearFit fit;
  json meta;
};

inline json to_json(const GrowthReport& g) {
  json j;
  j["schema"] = kArtifactSchema;
  j["kind"] = "growth_report";
  j["name"] = g.name;
  j["x"] = g.xs;
  j["y"] = g.ys;
  j["fit"] = to_json(g.fit);
  if (!g.meta.is_null()) j["meta"] = g.meta;
  return j;
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

inline void write_table_csv(const std::string& path, const std::string& schema_line,
                            const std::vector<std::string>& columns,
                            const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "# " << schema_line << "\n";
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
  out.precision(17);
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw std::runtime_error("write_table_csv: row width mismatch");
    for (std::size_t c = 0; c < row.size(); ++c)
      out << row[c] << (c + 1 < row.size() ? "," : "\n");
  }
}

}  // namespace finfty
