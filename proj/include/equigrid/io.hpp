#pragma once

// JSON and CSV serialization of grids, estimates and sweep rows.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "equigrid/analysis.hpp"
#include "equigrid/estimators.hpp"
#include "equigrid/grids.hpp"

namespace equigrid {

/// Shortest-safe round-trip formatting: 17 significant digits.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void to_json(nlohmann::json& j, const Grid& g) {
  j = nlohmann::json{{"family", std::string(to_string(g.family))}, {"n", g.size()}, {"points", g.points}};
  j["b"] = g.threshold_used ? nlohmann::json(*g.threshold_used) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, Grid& g) {
  g.family = grid_family_from_string(j.at("family").get<std::string>());
  g.points = j.at("points").get<std::vector<double>>();
  if (j.contains("b") && !j.at("b").is_null())
    g.threshold_used = j.at("b").get<double>();
  else
    g.threshold_used.reset();
  if (j.contains("n") && j.at("n").get<std::size_t>() != g.points.size())
    throw std::invalid_argument("grid JSON: n does not match the number of points");
}

inline void to_json(nlohmann::json& j, const EstimateResult& r) {
  j = nlohmann::json{{"estimate", r.estimate},
                     {"stderr", r.stderr_estimate()},
                     {"replicas", r.replicas},
                     {"variance", r.sample_variance},
                     {"scaled_estimate", r.scaled_estimate},
                     {"scaled_variance", r.scaled_variance},
                     {"log_reference", r.log_reference},
                     {"grid", r.grid},
                     {"seed", r.seed},
                     {"process", r.process},
                     {"b", r.b},
                     {"method", r.method},
                     {"wall_time", r.wall_time}};
}

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline void to_json(nlohmann::json& j, const BiasReport& r) {
  j = nlohmann::json{{"b", r.b},
                     {"grid", r.grid},
                     {"w_T_estimate", r.w_T_estimate},
                     {"denominator_kind", std::string(to_string(r.denominator_kind))},
                     {"beta", optional_json(r.beta)},
                     {"gamma", optional_json(r.gamma)},
                     {"stderr", r.standard_error},
                     {"gamma_stderr", r.gamma_stderr}};
  if (r.denominator_estimate) j["denominator_estimate"] = *r.denominator_estimate;
}

inline void to_json(nlohmann::json& j, const BoundsReport& r) {
  j = nlohmann::json{{"grid", r.grid},       {"b", r.b},
                     {"a", r.a},             {"a_stderr", r.a_stderr},
                     {"w", r.w},             {"lower", r.lower},
                     {"upper", r.upper},     {"lower_stderr", r.lower_stderr},
                     {"upper_stderr", r.upper_stderr}};
}

inline void to_json(nlohmann::json& j, const SweepRow& row) {
  j = nlohmann::json{{"index", row.index},
                     {"family", std::string(to_string(row.family))},
                     {"n", row.n},
                     {"b", row.b},
                     {"process", row.process},
                     {"seed", row.seed}};
  if (row.report) j["report"] = *row.report;
  if (!row.error.empty()) j["error"] = row.error;
}

/// Fixed CSV columns, one row per sweep point. Empty cells mean "not
/// available" (beta for processes without an oracle, failed rows).
inline const char* const kSweepCsvHeader =
    "family,n,b,process,estimate,stderr,beta,gamma,replicas,seed,beta_stderr,gamma_stderr,error";

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  os << kSweepCsvHeader << '\n';
  for (const auto& row : rows) {
    os << to_string(row.family) << ',' << row.n << ',' << format_real(row.b) << ',' << quote(row.process) << ',';
    if (row.report) {
      const auto& r = *row.report;
      const auto& e = r.w_T_estimate;
      os << format_real(e.estimate) << ',' << format_real(e.stderr_estimate()) << ',' << opt(r.beta) << ','
         << opt(r.gamma) << ',' << e.replicas << ',' << row.seed << ','
         << (r.beta ? format_real(r.standard_error) : std::string()) << ','
         << (r.gamma ? format_real(r.gamma_stderr) : std::string()) << ',';
    } else {
      os << ",,,,," << row.seed << ",,,";
    }
    os << quote(row.error) << '\n';
  }
}

}  // namespace equigrid
