#pragma once

// Bias and performance metrics: the relative bias beta_T(b), the gamma_T(b)
// ratio against the single-point benchmark, the orthant/first-passage bounds
// on beta_T(b), and parameter sweeps over grid families and thresholds.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "equigrid/estimators.hpp"
#include "equigrid/grids.hpp"
#include "equigrid/random.hpp"
#include "equigrid/replicas.hpp"
#include "equigrid/specfun.hpp"
#include "equigrid/stochastic.hpp"

namespace equigrid {

enum class Denominator { ExactBM, ExactSupSampler, MarginalTail };

inline std::string_view to_string(Denominator d) {
  switch (d) {
    case Denominator::ExactBM: return "exact-bm";
    case Denominator::ExactSupSampler: return "exact-sup-sampler";
    case Denominator::MarginalTail: return "marginal-tail";
  }
  return "unknown";
}

struct EstimatorOptions {
  ReplicaBudget budget = ReplicaBudget::fixed(100'000);
  /// Draws of the exact supremum sampler (BM with jumps denominators).
  ReplicaBudget sup_budget = ReplicaBudget::fixed(10'000'000);
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

struct BiasReport {
  double b = 0.0;
  Grid grid;
  EstimateResult w_T_estimate;
  Denominator denominator_kind = Denominator::ExactBM;
  std::optional<EstimateResult> denominator_estimate;  ///< sup-sampler run, when used
  std::optional<double> beta;
  std::optional<double> gamma;
  double standard_error = 0.0;  ///< of beta when present, else of gamma
  double gamma_stderr = 0.0;
};

/// beta = 1 - w_T(b) / (2 Phi(-b)) for Brownian motion; gamma as well when
/// t = 1 is a grid point.
inline BiasReport bias_bm(const Grid& grid, double b, const EstimatorOptions& opts) {
  if (!(b > 0.0)) throw std::domain_error("bias_bm: b must be positive");
  BiasReport r;
  r.b = b;
  r.grid = grid;
  r.denominator_kind = Denominator::ExactBM;
  r.w_T_estimate = estimate_w(grid, ProcessSpec::bm(), b, opts.budget, opts.seed, opts.workers);
  const auto& e = r.w_T_estimate;
  const double to_w = std::exp(e.log_reference - log_exact_bm_crossing(b));
  r.beta = 1.0 - e.scaled_estimate * to_w;
  r.standard_error = e.scaled_stderr() * to_w;
  if (grid.contains(1.0)) {
    r.gamma = e.scaled_estimate;
    r.gamma_stderr = e.scaled_stderr();
  }
  return r;
}

/// beta for Brownian motion with jumps, with w(b) estimated from exact
/// supremum draws; both error bars are propagated to first order.
inline BiasReport bias_bmjumps(const Grid& grid, double b, double rate, const EstimatorOptions& opts,
                               std::optional<EstimateResult> denominator = std::nullopt) {
  BiasReport r;
  r.b = b;
  r.grid = grid;
  r.denominator_kind = Denominator::ExactSupSampler;
  if (!denominator) denominator = sup_crossing_mc(b, rate, opts.sup_budget, derive_seed(opts.seed, 0x5u), opts.workers);
  r.denominator_estimate = denominator;
  const ProcessSpec process = ProcessSpec::bm_jumps(rate);
  r.w_T_estimate = estimate_w(grid, process, b, opts.budget, opts.seed, opts.workers);
  const auto& e = r.w_T_estimate;
  const auto& d = *denominator;
  if (grid.contains(1.0)) {
    r.gamma = e.scaled_estimate;
    r.gamma_stderr = e.scaled_stderr();
  }
  if (!(d.scaled_estimate > 0.0)) return r;  // no crossing observed: beta unavailable
  const double num = e.scaled_estimate * std::exp(e.log_reference - d.log_reference);
  const double num_se = e.scaled_stderr() * std::exp(e.log_reference - d.log_reference);
  const double den = d.scaled_estimate;
  const double den_se = d.scaled_stderr();
  const double ratio = num / den;
  r.beta = 1.0 - ratio;
  r.standard_error = std::sqrt((num_se / den) * (num_se / den) + (ratio * den_se / den) * (ratio * den_se / den));
  return r;
}

/// gamma = w_T(b) / P(X_1 > b); requires t* = 1 to be a grid point.
inline BiasReport gamma_general(const Grid& grid, double b, const ProcessSpec& process, const EstimatorOptions& opts) {
  if (!grid.contains(process.tail_argmax()))
    throw std::invalid_argument("gamma_general: grid must contain t* = 1");
  BiasReport r;
  r.b = b;
  r.grid = grid;
  r.denominator_kind = Denominator::MarginalTail;
  r.w_T_estimate = estimate_w(grid, process, b, opts.budget, opts.seed, opts.workers);
  r.gamma = r.w_T_estimate.scaled_estimate;
  r.gamma_stderr = r.w_T_estimate.scaled_stderr();
  r.standard_error = r.gamma_stderr;
  return r;
}

/// w_j = P(tau_b in (t_{j-1}, t_j] | tau_b <= 1) for Brownian motion, t_0 = 0.
inline std::vector<double> first_passage_increments(const Grid& grid, double b) {
  if (!(b > 0.0)) throw std::domain_error("first_passage_increments: b must be positive");
  const double log_total = log_normal_tail(b).value();
  std::vector<double> w(grid.size());
  double prev = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double cur = std::exp(bm_marginal_log_tail(grid[j], b).value() - log_total);
    w[j] = cur - prev;
    prev = cur;
  }
  return w;
}

struct BoundsReport {
  Grid grid;
  double b = 0.0;
  /// a_1 .. a_{n+1}; a_n and a_{n+1} are exactly 1/2.
  std::vector<double> a;
  std::vector<double> a_stderr;
  std::vector<double> w;  ///< w_1 .. w_n
  double lower = 0.0;
  double upper = 0.0;
  double lower_stderr = 0.0;
  double upper_stderr = 0.0;
};

/// Probability that a Brownian motion stays negative at the given times,
/// by Monte Carlo over the walk.
inline EstimateResult orthant_negative_mc(std::span<const double> times, const ReplicaBudget& budget,
                                          std::uint64_t seed, unsigned workers = 1) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> step_sd(times.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > prev)) throw std::domain_error("orthant_negative_mc: times must be positive and increasing");
    step_sd[i] = std::sqrt(times[i] - prev);
    prev = times[i];
  }
  struct Worker {
    const std::vector<double>* sd;
    double operator()(SeededRng& rng) {
      double x = 0.0;
      for (double s : *sd) {
        x += s * rng.normal();
        if (x >= 0.0) return 0.0;
      }
      return 1.0;
    }
  };
  const RunningStats s = detail::run_budget(budget, seed, workers, [&] { return Worker{&step_sd}; });
  Grid g;
  g.points.assign(times.begin(), times.end());
  return detail::finish(s, 0.0, g, ProcessSpec::bm(), 0.0, seed, "orthant-mc", start);
}

/// Plug-in lower and upper bounds
///   lower = 1/2 sum_j a_{j+1} w_j,   upper = sum_j a_j w_j
/// on beta_T(b), with w_j exact and a_j estimated by Monte Carlo over
/// independent Gaussian walks on the shifted grid {t_j - t_{j-1}, ..., t_n - t_{j-1}}.
inline BoundsReport orthant_bias_bounds(const Grid& grid, double b, std::size_t vectors_per_term, std::uint64_t seed,
                                   unsigned workers = 1) {
  const std::size_t n = grid.size();
  if (n == 0) throw std::invalid_argument("orthant_bias_bounds: empty grid");
  BoundsReport r;
  r.grid = grid;
  r.b = b;
  r.w = first_passage_increments(grid, b);
  r.a.assign(n + 1, 0.5);
  r.a_stderr.assign(n + 1, 0.0);
  std::vector<double> shifted;
  for (std::size_t j = 0; j + 1 < n; ++j) {  // a_{j+1} in 1-based terms
    const double origin = j == 0 ? 0.0 : grid[j - 1];
    shifted.clear();
    for (std::size_t i = j; i < n; ++i) shifted.push_back(grid[i] - origin);
    const auto est = orthant_negative_mc(shifted, ReplicaBudget::fixed(vectors_per_term), derive_seed(seed, j), workers);
    r.a[j] = est.scaled_estimate;
    r.a_stderr[j] = est.scaled_stderr();
  }
  double lv = 0.0, uv = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    r.lower += 0.5 * r.a[j + 1] * r.w[j];
    r.upper += r.a[j] * r.w[j];
    lv += 0.25 * r.w[j] * r.w[j] * r.a_stderr[j + 1] * r.a_stderr[j + 1];
    uv += r.w[j] * r.w[j] * r.a_stderr[j] * r.a_stderr[j];
  }
  r.lower_stderr = std::sqrt(lv);
  r.upper_stderr = std::sqrt(uv);
  return r;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class Metric { Beta, Gamma };

struct SweepConfig {
  std::vector<GridFamily> families{GridFamily::Equidistant, GridFamily::ThresholdDependentBM};
  std::vector<std::size_t> ns{100};
  std::vector<double> bs{3.0};
  ProcessSpec process = ProcessSpec::bm();
  Metric metric = Metric::Beta;
  double b0 = kDefaultB0;
  /// Fixed replicas per row, used when target_stderr == 0.
  std::size_t replicas = 100'000;
  /// Target standard error on the row's metric (beta or gamma).
  double target_stderr = 0.0;
  std::size_t max_replicas = 20'000'000;
  /// Exact supremum draws per threshold (BM with jumps beta).
  std::size_t sup_draws = 10'000'000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

struct SweepRow {
  std::size_t index = 0;
  GridFamily family = GridFamily::Equidistant;
  std::size_t n = 0;
  double b = 0.0;
  std::string process;
  std::uint64_t seed = 0;
  std::optional<BiasReport> report;
  std::string error;  ///< non-empty when the row could not be computed
};

/// Whether the metric has an oracle for this process.
inline bool metric_supported(Metric m, const ProcessSpec& p) {
  if (m == Metric::Gamma) return true;
  return p.kind() == ProcessKind::BM || p.kind() == ProcessKind::BMJumps;
}

/// Cartesian sweep family x n x b in that nesting order. Row i uses
/// derive_seed(seed, i); thresholds share one supremum-sampler run.
inline std::vector<SweepRow> sweep(const SweepConfig& cfg) {
  std::vector<SweepRow> rows;
  std::map<std::size_t, EstimateResult> denominators;  // by threshold index
  std::size_t index = 0;
  for (GridFamily family : cfg.families) {
    for (std::size_t n : cfg.ns) {
      for (std::size_t bi = 0; bi < cfg.bs.size(); ++bi) {
        const double b = cfg.bs[bi];
        SweepRow row;
        row.index = index;
        row.family = family;
        row.n = n;
        row.b = b;
        row.process = cfg.process.name();
        row.seed = derive_seed(cfg.seed, index);
        ++index;
        try {
          if (!metric_supported(cfg.metric, cfg.process))
            throw std::invalid_argument("beta requires an exact oracle; unavailable for " + cfg.process.name());
          const Grid grid = make_grid(family, n, b, cfg.process, cfg.b0);
          EstimatorOptions opts;
          opts.seed = row.seed;
          opts.workers = cfg.workers;
          opts.budget = ReplicaBudget::fixed(cfg.replicas);
          const bool jumps_beta = cfg.metric == Metric::Beta && cfg.process.kind() == ProcessKind::BMJumps;
          std::optional<EstimateResult> den;
          if (jumps_beta) {
            auto it = denominators.find(bi);
            if (it == denominators.end())
              it = denominators
                       .emplace(bi, sup_crossing_mc(b, cfg.process.rate(), ReplicaBudget::fixed(cfg.sup_draws),
                                                    derive_seed(cfg.seed, 1'000'000 + bi), cfg.workers))
                       .first;
            den = it->second;
          }
          if (cfg.target_stderr > 0.0) {
            // Convert the metric-scale target into a target on the scaled
            // estimate (w_T / P(X_{t_n} > b)).
            double scale = 1.0;
            if (cfg.metric == Metric::Beta) {
              if (cfg.process.kind() == ProcessKind::BM) {
                scale = std::exp(log_exact_bm_crossing(b) - cfg.process.marginal_log_tail(grid.points.back(), b).value());
              } else if (den && den->scaled_estimate > 0.0) {
                scale = den->scaled_estimate * std::exp(den->log_reference -
                                                        cfg.process.marginal_log_tail(grid.points.back(), b).value());
              }
            }
            opts.budget = ReplicaBudget::scaled_stderr(cfg.target_stderr * scale, cfg.max_replicas);
          }
          if (cfg.metric == Metric::Beta && cfg.process.kind() == ProcessKind::BM)
            row.report = bias_bm(grid, b, opts);
          else if (jumps_beta)
            row.report = bias_bmjumps(grid, b, cfg.process.rate(), opts, den);
          else
            row.report = gamma_general(grid, b, cfg.process, opts);
        } catch (const std::exception& ex) {
          row.error = ex.what();
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace equigrid
