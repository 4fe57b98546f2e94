#pragma once

// Rare-event estimator of the discrete crossing probability
//   w_T(b) = P(max_{t in T} X_t > b),
// its strong-efficiency replica driver, crude Monte Carlo baselines and the
// exact Brownian-motion oracles.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "equigrid/gausspath.hpp"
#include "equigrid/grids.hpp"
#include "equigrid/random.hpp"
#include "equigrid/replicas.hpp"
#include "equigrid/specfun.hpp"
#include "equigrid/stochastic.hpp"

namespace equigrid {

/// Average of i.i.d. replicas of an estimator of w_T(b).
///
/// Replica values are accumulated relative to `log_reference`, the log of the
/// largest single-point tail P(X_t > b) on the grid (P(X_{t*} > b) whenever
/// t* = 1 is a grid point). `scaled_estimate` is therefore the gamma metric
/// directly, and stays representable for thresholds where the absolute
/// probability underflows.
struct EstimateResult {
  double estimate = 0.0;         ///< absolute estimate of w_T(b)
  double sample_variance = 0.0;  ///< per-replica variance, absolute units
  double scaled_estimate = 0.0;  ///< estimate / exp(log_reference)
  double scaled_variance = 0.0;  ///< per-replica variance, scaled units
  double log_reference = 0.0;
  std::size_t replicas = 0;
  Grid grid;
  std::string process;
  double b = 0.0;
  std::uint64_t seed = 0;
  std::string method;
  double wall_time = 0.0;  ///< seconds

  double stderr_estimate() const {
    return replicas ? std::sqrt(sample_variance / static_cast<double>(replicas)) : 0.0;
  }
  double scaled_stderr() const {
    return replicas ? std::sqrt(scaled_variance / static_cast<double>(replicas)) : 0.0;
  }
  /// Standard error divided by the estimate.
  double relative_stderr() const {
    return scaled_estimate > 0.0 ? scaled_stderr() / scaled_estimate : std::numeric_limits<double>::infinity();
  }
};

/// Target accuracy epsilon, confidence alpha and a known bias bound beta.
struct EfficiencyConfig {
  double epsilon = 0.1;
  double alpha = 0.05;
  double beta_bound = 0.0;

  void check() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::domain_error("epsilon must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
    if (!(beta_bound >= 0.0)) throw std::domain_error("beta_bound must be >= 0");
    if (!(beta_bound < epsilon)) throw std::domain_error("beta_bound must be smaller than epsilon");
  }
};

/// N = ceil(n^2 / (alpha (epsilon - beta)^2)): replicas that guarantee
/// P(|w_hat/w - 1| > epsilon) < alpha by Chebyshev with relative variance <= n^2.
inline std::size_t required_replicas(std::size_t n, const EfficiencyConfig& cfg) {
  cfg.check();
  const double gap = cfg.epsilon - cfg.beta_bound;
  const double dn = static_cast<double>(n);
  const double raw = dn * dn / (cfg.alpha * gap * gap);
  // Absorb the rounding of epsilon - beta so exact arithmetic results are not
  // bumped to the next integer.
  return static_cast<std::size_t>(std::ceil(raw * (1.0 - 1e-12)));
}

/// How many replicas to run: a fixed count, or batches until a standard-error
/// target is met (bounded by max_replicas).
struct ReplicaBudget {
  std::size_t replicas = 0;
  double target_scaled_stderr = 0.0;    ///< stop when stderr of scaled estimate <= this
  double target_relative_stderr = 0.0;  ///< stop when stderr / estimate <= this
  std::size_t min_replicas = 4 * kReplicaBlock;
  std::size_t max_replicas = 20'000'000;

  static ReplicaBudget fixed(std::size_t n) {
    ReplicaBudget b;
    b.replicas = n;
    return b;
  }
  static ReplicaBudget scaled_stderr(double target, std::size_t max = 20'000'000) {
    ReplicaBudget b;
    b.target_scaled_stderr = target;
    b.max_replicas = max;
    return b;
  }
  static ReplicaBudget relative_stderr(double target, std::size_t max = 20'000'000) {
    ReplicaBudget b;
    b.target_relative_stderr = target;
    b.max_replicas = max;
    return b;
  }
  static ReplicaBudget efficiency(std::size_t grid_size, const EfficiencyConfig& cfg) {
    return fixed(required_replicas(grid_size, cfg));
  }

  bool adaptive() const noexcept { return target_scaled_stderr > 0.0 || target_relative_stderr > 0.0; }
};

namespace detail {

template <class WorkerFactory>
RunningStats run_budget(const ReplicaBudget& budget, std::uint64_t seed, unsigned workers, WorkerFactory&& factory) {
  if (!budget.adaptive()) {
    if (budget.replicas == 0) throw std::invalid_argument("replica budget: replicas must be >= 1");
    return run_replicas(budget.replicas, seed, workers, factory);
  }
  auto done = [&](const RunningStats& s) {
    const double se = s.standard_error();
    if (budget.target_scaled_stderr > 0.0 && se > budget.target_scaled_stderr) return false;
    if (budget.target_relative_stderr > 0.0 && !(s.mean > 0.0 && se <= budget.target_relative_stderr * s.mean))
      return false;
    return true;
  };
  return run_replicas_until(budget.min_replicas, budget.max_replicas, seed, workers, factory, done);
}

inline EstimateResult finish(const RunningStats& s, double log_reference, const Grid& grid, const ProcessSpec& process,
                             double b, std::uint64_t seed, std::string method,
                             std::chrono::steady_clock::time_point start) {
  EstimateResult r;
  r.scaled_estimate = s.mean;
  r.scaled_variance = s.variance();
  r.log_reference = log_reference;
  const double ref = std::exp(log_reference);
  r.estimate = s.mean * ref;
  r.sample_variance = r.scaled_variance * ref * ref;
  r.replicas = s.count;
  r.grid = grid;
  r.process = process.name();
  r.b = b;
  r.seed = seed;
  r.method = std::move(method);
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// Index k with cdf[k-1] <= u < cdf[k].
inline std::size_t draw_categorical(std::span<const double> cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

// Sorted jump counts of a rate-`rate` Poisson process at the grid times.
inline void poisson_counts_on_grid(SeededRng& rng, double rate, std::span<const double> times,
                                   std::vector<double>& jump_times, std::span<double> counts) {
  const auto k = sample_poisson(rng, rate);
  jump_times.resize(static_cast<std::size_t>(k));
  for (auto& s : jump_times) s = rng.uniform();
  std::sort(jump_times.begin(), jump_times.end());
  std::size_t seen = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    while (seen < jump_times.size() && jump_times[seen] <= times[i]) ++seen;
    counts[i] = static_cast<double>(seen);
  }
}

}  // namespace detail

/// Importance-sampling estimator of w_T(b) for the supported processes.
///
/// One replica: pick a grid index k with probability proportional to
/// P(X_{t_k} > b), draw X_{t_k} conditioned on exceeding b, fill in the rest
/// of the path conditionally on that coordinate, and return
///   sum_j P(X_{t_j} > b) / #{j : X_{t_j} > b}.
/// The denominator is at least one because coordinate k exceeds b.
///
/// For Brownian motion with jumps, X_{t_k} > b is drawn as a pair: the jump
/// count N_{t_k} from its law given the exceedance, then B_{t_k} above
/// b - N_{t_k}. The Brownian path is a bridge through B_{t_k}; the jumps
/// before t_k are uniform on (0, t_k) and those after are fresh.
class RareEventEstimator {
 public:
  RareEventEstimator(Grid grid, ProcessSpec process, double b)
      : grid_(std::move(grid)), process_(process), b_(b) {
    if (!std::isfinite(b_)) throw std::domain_error("RareEventEstimator: b must be finite");
    if (grid_.points.empty()) throw std::invalid_argument("RareEventEstimator: empty grid");
    for (double t : grid_.points) require_time(t, "RareEventEstimator");
    const std::size_t n = grid_.size();
    dist_ = std::make_shared<const PathDistribution>(PathDistribution::assemble(grid_, process_));
    samplers_.reserve(n);
    for (std::size_t k = 0; k < n; ++k) samplers_.emplace_back(dist_, k);
    sd_.resize(n);
    for (std::size_t j = 0; j < n; ++j) sd_[j] = process_.marginal_sd(grid_.points[j]);

    log_tail_.resize(n);
    for (std::size_t j = 0; j < n; ++j) log_tail_[j] = process_.marginal_log_tail(grid_.points[j], b_).value();
    log_reference_ = *std::max_element(log_tail_.begin(), log_tail_.end());

    cdf_.resize(n);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      acc += std::exp(log_tail_[j] - log_reference_);
      cdf_[j] = acc;
    }
    scaled_sum_ = acc;

    if (!process_.is_gaussian()) {
      // P(N_{t_k} = m | X_{t_k} > b) as a cdf over m, per grid index.
      jump_count_cdf_.resize(n);
      const double rate = process_.rate();
      for (std::size_t k = 0; k < n; ++k) {
        auto& cdf = jump_count_cdf_[k];
        const double mu = rate * grid_.points[k];
        double total = 0.0;
        for (int m = 0; m < 200; ++m) {
          const double log_pmf = mu > 0.0 ? -mu + m * std::log(mu) - std::lgamma(m + 1.0) : (m == 0 ? 0.0 : -INFINITY);
          const double term = std::exp(log_pmf + log_normal_tail((b_ - m) / sd_[k]).value() - log_tail_[k]);
          total += term;
          cdf.push_back(total);
          if (m > mu && m > b_ && term < 1e-17 * total) break;
        }
      }
    }
  }

  const Grid& grid() const noexcept { return grid_; }
  const ProcessSpec& process() const noexcept { return process_; }
  double threshold() const noexcept { return b_; }
  double log_reference() const noexcept { return log_reference_; }
  const PathDistribution& distribution() const noexcept { return *dist_; }
  const ConditionalSampler& sampler(std::size_t k) const { return samplers_.at(k); }

  /// sum_j P(X_{t_j} > b) relative to exp(log_reference()).
  double scaled_tail_sum() const noexcept { return scaled_sum_; }

  /// Per-thread scratch plus a replica functor; one per worker.
  class Worker {
   public:
    explicit Worker(const RareEventEstimator& est)
        : est_(&est), path_(est.grid_.size()), scratch_(est.grid_.size()) {}

    /// One replica, relative to exp(log_reference).
    double operator()(SeededRng& rng) {
      const RareEventEstimator& e = *est_;
      const std::size_t k = detail::draw_categorical(e.cdf_, rng.uniform());
      if (e.process_.is_gaussian()) {
        const double x = sample_truncated_normal_tail(rng, 0.0, e.sd_[k], e.b_);
        e.samplers_[k].sample_into(rng, x, {}, path_, scratch_);
      } else {
        const auto m = detail::draw_categorical(e.jump_count_cdf_[k], rng.uniform());
        const double x = sample_truncated_normal_tail(rng, 0.0, e.sd_[k], e.b_ - static_cast<double>(m));
        e.samplers_[k].sample_into(rng, x, {}, path_, scratch_);
        add_jumps(rng, k, m);
        // Keep the conditioned coordinate above b despite rounding.
        path_[k] = std::max(path_[k], std::nextafter(e.b_, INFINITY));
      }
      return e.scaled_sum_ / static_cast<double>(count_above(k));
    }

   private:
    // Adds jump counts given m jumps by t_k: m uniform times on (0, t_k)
    // plus a fresh Poisson process on (t_k, 1].
    void add_jumps(SeededRng& rng, std::size_t k, std::size_t m) {
      const auto& t = est_->grid_.points;
      const double tk = t[k];
      jumps_.resize(m);
      for (auto& s : jumps_) s = tk * rng.uniform();
      const auto after = sample_poisson(rng, est_->process_.rate() * (1.0 - tk));
      for (std::int64_t i = 0; i < after; ++i) jumps_.push_back(tk + (1.0 - tk) * rng.uniform());
      std::sort(jumps_.begin(), jumps_.end());
      std::size_t seen = 0;
      for (std::size_t j = 0; j < t.size(); ++j) {
        if (j == k) {
          seen = m;
        } else {
          while (seen < jumps_.size() && jumps_[seen] <= t[j]) ++seen;
        }
        path_[j] += static_cast<double>(seen);
      }
    }

    std::size_t count_above(std::size_t k) const {
      std::size_t count = 1;
      const double b = est_->b_;
      for (std::size_t j = 0; j < path_.size(); ++j)
        if (j != k && path_[j] > b) ++count;
      return count;
    }

    const RareEventEstimator* est_;
    std::vector<double> path_, scratch_, jumps_;
  };

  Worker make_worker() const { return Worker(*this); }

  /// A single replica in absolute units.
  double single_replica(SeededRng& rng) const {
    Worker w(*this);
    return w(rng) * std::exp(log_reference_);
  }

  EstimateResult estimate(const ReplicaBudget& budget, std::uint64_t seed, unsigned workers = 1) const {
    const auto start = std::chrono::steady_clock::now();
    const RunningStats s = detail::run_budget(budget, seed, workers, [this] { return make_worker(); });
    return detail::finish(s, log_reference_, grid_, process_, b_, seed, "rare-event", start);
  }

 private:
  Grid grid_;
  ProcessSpec process_;
  double b_;
  std::shared_ptr<const PathDistribution> dist_;
  std::vector<ConditionalSampler> samplers_;
  std::vector<double> sd_;
  std::vector<double> log_tail_;
  std::vector<double> cdf_;
  std::vector<std::vector<double>> jump_count_cdf_;
  double log_reference_ = 0.0;
  double scaled_sum_ = 0.0;
};

inline double rare_event_single_replica(const Grid& grid, const ProcessSpec& process, double b, SeededRng& rng) {
  return RareEventEstimator(grid, process, b).single_replica(rng);
}

/// Average of N replicas (fixed N, N from an EfficiencyConfig, or adaptive).
inline EstimateResult estimate_w(const Grid& grid, const ProcessSpec& process, double b, const ReplicaBudget& budget,
                                 std::uint64_t master_seed, unsigned workers = 1) {
  return RareEventEstimator(grid, process, b).estimate(budget, master_seed, workers);
}

inline EstimateResult estimate_w(const Grid& grid, const ProcessSpec& process, double b, const EfficiencyConfig& cfg,
                                 std::uint64_t master_seed, unsigned workers = 1) {
  return estimate_w(grid, process, b, ReplicaBudget::efficiency(grid.size(), cfg), master_seed, workers);
}

/// Fraction of sampled discrete paths whose grid maximum exceeds b.
inline EstimateResult crude_mc(const Grid& grid, const ProcessSpec& process, double b, const ReplicaBudget& budget,
                               std::uint64_t seed, unsigned workers = 1) {
  const auto start = std::chrono::steady_clock::now();
  for (double t : grid.points) require_time(t, "crude_mc");
  const auto dist = std::make_shared<const PathDistribution>(PathDistribution::assemble(grid, process));
  double log_ref = -std::numeric_limits<double>::infinity();
  if (b == -std::numeric_limits<double>::infinity()) {
    log_ref = 0.0;
  } else {
    for (double t : grid.points) log_ref = std::max(log_ref, process.marginal_log_tail(t, b).value());
  }
  const double inv_ref = std::exp(-log_ref);

  struct Worker {
    const PathDistribution* dist;
    const ProcessSpec* process;
    double b;
    double inv_ref;
    std::vector<double> path, scratch, counts, jumps;
    double operator()(SeededRng& rng) {
      dist->sample_centered(rng, path, scratch);
      if (!process->is_gaussian()) {
        detail::poisson_counts_on_grid(rng, process->rate(), dist->times(), jumps, counts);
        for (std::size_t i = 0; i < path.size(); ++i) path[i] += counts[i];
      }
      for (double v : path)
        if (v > b) return inv_ref;
      return 0.0;
    }
  };
  const std::size_t n = grid.size();
  auto factory = [&] { return Worker{dist.get(), &process, b, inv_ref, std::vector<double>(n), std::vector<double>(n),
                                     std::vector<double>(n), {}}; };
  const RunningStats s = detail::run_budget(budget, seed, workers, factory);
  return detail::finish(s, log_ref, grid, process, b, seed, "crude", start);
}

/// w(b) = 2 Phi(-b) for Brownian motion on [0, 1] (reflection principle).
inline double exact_bm_crossing(double b) {
  if (!(b > 0.0)) throw std::domain_error("exact_bm_crossing: b must be positive");
  return 2.0 * normal_tail(b);
}

inline double log_exact_bm_crossing(double b) {
  if (!(b > 0.0)) throw std::domain_error("exact_bm_crossing: b must be positive");
  return std::log(2.0) + log_normal_tail(b).value();
}

/// Maximum of a Brownian bridge from a1 to a2 over duration d, by inverting
/// P(M <= m) = 1 - exp(-2 (m - a1)(m - a2) / d) at probability u.
inline double bridge_max_inverse(double a1, double a2, double d, double u) {
  if (!(d > 0.0)) throw std::domain_error("bridge_max_inverse: duration must be positive");
  if (!(u >= 0.0 && u < 1.0)) throw std::domain_error("bridge_max_inverse: u must lie in [0, 1)");
  const double diff = a2 - a1;
  return 0.5 * (a1 + a2 + std::sqrt(diff * diff - 2.0 * d * std::log1p(-u)));
}

/// Exact draw of sup_{t in [0,1]} (B_t + N_t) for a rate-`rate` Poisson N:
/// Brownian values at the jump times and at t = 1, jumps added, and the
/// maximum of every inter-jump bridge segment drawn by inversion. The path
/// value at t = 1 is written to `endpoint` when given.
inline double sample_bmjumps_sup(SeededRng& rng, double rate, std::vector<double>& jump_times,
                                 double* endpoint = nullptr) {
  const auto k = sample_poisson(rng, rate);
  jump_times.resize(static_cast<std::size_t>(k));
  for (auto& s : jump_times) s = rng.uniform();
  std::sort(jump_times.begin(), jump_times.end());

  double t0 = 0.0;
  double x0 = 0.0;  // value right after the previous jump
  double sup = 0.0;
  auto segment = [&](double t1) {
    const double d = t1 - t0;
    if (!(d > 0.0)) return x0;  // simultaneous jumps
    const double x1 = x0 + std::sqrt(d) * rng.normal();
    sup = std::max(sup, bridge_max_inverse(x0, x1, d, 1.0 - rng.uniform()));
    return x1;
  };
  for (double s : jump_times) {
    const double before = segment(s);
    t0 = s;
    x0 = before + 1.0;
    sup = std::max(sup, x0);
  }
  const double last = segment(1.0);
  if (endpoint) *endpoint = last;
  return sup;
}

inline double exact_bmjumps_sup_sampler(SeededRng& rng, double rate) {
  std::vector<double> scratch;
  return sample_bmjumps_sup(rng, rate, scratch);
}

/// Crude estimate of w(b) = P(sup (B + N) > b) from exact supremum draws.
/// Scaled relative to P(X_1 > b) like every other estimate.
inline EstimateResult sup_crossing_mc(double b, double rate, const ReplicaBudget& budget, std::uint64_t seed,
                                      unsigned workers = 1) {
  const auto start = std::chrono::steady_clock::now();
  const ProcessSpec process = ProcessSpec::bm_jumps(rate);
  const double log_ref = process.marginal_log_tail(1.0, b).value();
  const double inv_ref = std::exp(-log_ref);
  struct Worker {
    double b, rate, inv_ref;
    std::vector<double> jumps;
    double operator()(SeededRng& rng) { return sample_bmjumps_sup(rng, rate, jumps) > b ? inv_ref : 0.0; }
  };
  const RunningStats s = detail::run_budget(budget, seed, workers, [&] { return Worker{b, rate, inv_ref, {}}; });
  Grid continuum;
  continuum.points = {1.0};
  return detail::finish(s, log_ref, continuum, process, b, seed, "sup-sampler", start);
}

/// P(S_1 > 0, ..., S_n > 0) for a symmetric Gaussian random walk:
/// C(2n, n) / 4^n, evaluated in log space.
inline double orthant_equidistant_exact(std::size_t n) {
  if (n == 0) throw std::invalid_argument("orthant_equidistant_exact: n must be >= 1");
  const double dn = static_cast<double>(n);
  return std::exp(std::lgamma(2.0 * dn + 1.0) - 2.0 * std::lgamma(dn + 1.0) - dn * std::log(4.0));
}

}  // namespace equigrid
