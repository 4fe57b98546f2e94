#pragma once

// Sweep definitions behind `reproduce-figure N`. The defaults are sized for a
// desk run; `full` tightens the error bars.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "equigrid/analysis.hpp"
#include "equigrid/grids.hpp"
#include "equigrid/io.hpp"

namespace equigrid {

inline constexpr int kFigureCount = 7;

/// `count` integers spread log-uniformly over [lo, hi], deduplicated.
inline std::vector<std::size_t> log_spaced_sizes(std::size_t lo, std::size_t hi, std::size_t count) {
  if (lo == 0 || hi < lo || count < 2) throw std::invalid_argument("log_spaced_sizes: need 0 < lo <= hi, count >= 2");
  std::vector<std::size_t> out;
  const double a = std::log(static_cast<double>(lo)), c = std::log(static_cast<double>(hi));
  for (std::size_t i = 0; i < count; ++i) {
    const auto n = static_cast<std::size_t>(std::llround(std::exp(a + (c - a) * static_cast<double>(i) / (count - 1.0))));
    if (out.empty() || n != out.back()) out.push_back(n);
  }
  return out;
}

inline std::vector<double> integer_range(int lo, int hi) {
  std::vector<double> out;
  for (int b = lo; b <= hi; ++b) out.push_back(b);
  return out;
}

struct FigurePlan {
  int number = 0;
  std::string description;
  /// Empty for figure 3, which lists grid points instead of estimates.
  std::vector<SweepConfig> sweeps;
  std::vector<double> grid_thresholds;  ///< figure 3 only
  std::size_t grid_size = 0;            ///< figure 3 only
};

inline FigurePlan figure_plan(int number, bool full, std::uint64_t seed, unsigned workers) {
  FigurePlan plan;
  plan.number = number;
  SweepConfig base;
  base.seed = seed;
  base.workers = workers;
  switch (number) {
    case 1: {
      plan.description = "beta vs n, equidistant grid, b in {5,6,7,8}";
      base.families = {GridFamily::Equidistant};
      base.ns = log_spaced_sizes(50, 2000, full ? 16 : 8);
      base.bs = {5.0, 6.0, 7.0, 8.0};
      base.target_stderr = full ? 0.004 : 0.01;
      plan.sweeps.push_back(base);
      break;
    }
    case 2: {
      plan.description = "beta vs b, both grids, n = 100";
      base.ns = {100};
      base.bs = integer_range(1, 10);
      base.target_stderr = full ? 0.003 : 0.006;
      plan.sweeps.push_back(base);
      break;
    }
    case 3: {
      plan.description = "threshold-dependent grid with 5 points as b grows";
      plan.grid_size = 5;
      for (double b = 1.0; b <= 10.0 + 1e-9; b += full ? 0.25 : 1.0) plan.grid_thresholds.push_back(b);
      break;
    }
    case 4: {
      plan.description = "beta vs n, threshold-dependent grid, b = 3";
      base.families = {GridFamily::ThresholdDependentBM};
      base.ns = full ? log_spaced_sizes(10, 1000, 13) : std::vector<std::size_t>{25, 50, 100, 200, 400};
      base.bs = {3.0};
      base.target_stderr = full ? 0.002 : 0.005;
      plan.sweeps.push_back(base);
      break;
    }
    case 5: {
      plan.description = "Brownian motion with unit-rate jumps, beta and gamma vs b, n = 100";
      base.process = ProcessSpec::bm_jumps(1.0);
      base.ns = {100};
      base.bs = integer_range(1, 8);
      base.replicas = full ? 400'000 : 50'000;
      base.sup_draws = full ? 40'000'000 : 4'000'000;
      plan.sweeps.push_back(base);
      break;
    }
    case 6: {
      plan.description = "Ornstein-Uhlenbeck gamma vs b, n = 100";
      base.process = ProcessSpec::ou();
      base.metric = Metric::Gamma;
      base.ns = {100};
      base.bs = integer_range(1, 10);
      base.replicas = full ? 200'000 : 20'000;
      plan.sweeps.push_back(base);
      break;
    }
    case 7: {
      plan.description = "fractional Brownian motion gamma vs b, H = 0.4 and 0.6, n = 100";
      base.metric = Metric::Gamma;
      base.ns = {100};
      base.bs = integer_range(1, 10);
      base.replicas = full ? 200'000 : 20'000;
      for (double h : {0.4, 0.6}) {
        base.process = ProcessSpec::fbm(h);
        base.seed = derive_seed(seed, static_cast<std::uint64_t>(h * 10));
        plan.sweeps.push_back(base);
      }
      break;
    }
    default:
      throw std::invalid_argument("figure number must lie in 1.." + std::to_string(kFigureCount));
  }
  return plan;
}

/// Runs every sweep of the plan; rows are concatenated in plan order.
inline std::vector<SweepRow> run_figure(const FigurePlan& plan) {
  std::vector<SweepRow> rows;
  for (const auto& cfg : plan.sweeps) {
    auto part = sweep(cfg);
    for (auto& r : part) rows.push_back(std::move(r));
  }
  return rows;
}

/// Figure 3 as CSV: one line per (b, k).
inline void write_grid_evolution_csv(std::ostream& os, const FigurePlan& plan) {
  os << "b,k,t\n";
  for (double b : plan.grid_thresholds) {
    const Grid g = threshold_dependent_bm(plan.grid_size, b);
    for (std::size_t k = 0; k < g.size(); ++k) os << format_real(b) << ',' << k + 1 << ',' << format_real(g[k]) << '\n';
  }
}

}  // namespace equigrid
