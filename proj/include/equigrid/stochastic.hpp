#pragma once

// Process specifications: marginal tail functions, covariance kernels and the
// time of maximal marginal tail for the four supported processes.

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "equigrid/specfun.hpp"

namespace equigrid {

enum class ProcessKind { BM, BMJumps, OU, FBM };

inline void require_time(double t, const char* where) {
  if (!(t > 0.0 && t <= 1.0)) throw std::domain_error(std::string(where) + ": time must lie in (0, 1]");
}

/// log P(B_t > b) = log Phi(-b/sqrt(t)).
inline LogTail bm_marginal_log_tail(double t, double b) {
  require_time(t, "bm_marginal_log_tail");
  return log_normal_tail(b / std::sqrt(t));
}

/// log P(B_t + N_t > b) for a rate-`rate` Poisson process N, summing the
/// Poisson mixture in log space. The sum is cut once a term past the bulk
/// contributes less than 1e-16 of the running total (at most 200 terms).
inline LogTail bmjumps_marginal_log_tail(double t, double b, double rate) {
  require_time(t, "bmjumps_marginal_log_tail");
  if (!(rate >= 0.0)) throw std::domain_error("bmjumps_marginal_log_tail: rate must be >= 0");
  const double sd = std::sqrt(t);
  if (rate == 0.0) return log_normal_tail(b / sd);
  const double mu = rate * t;
  const double log_mu = std::log(mu);
  double total = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 200; ++k) {
    const double log_pmf = -mu + k * log_mu - std::lgamma(k + 1.0);
    const double term = log_pmf + log_normal_tail((b - k) / sd).value();
    total = log_add_exp(total, term);
    if (k > mu && k > b && term - total < std::log(1e-16)) break;
  }
  return LogTail(std::min(0.0, total));
}

/// Ornstein-Uhlenbeck covariance for dX = -X dt + dW, X_0 = 0.
inline double ou_covariance(double s, double t) {
  return 0.5 * (std::exp(-std::abs(t - s)) - std::exp(-(t + s)));
}

inline double ou_variance(double t) { return -0.5 * std::expm1(-2.0 * t); }

inline LogTail ou_marginal_log_tail(double t, double b) {
  require_time(t, "ou_marginal_log_tail");
  return log_normal_tail(b / std::sqrt(ou_variance(t)));
}

inline void require_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::domain_error("fBM: Hurst parameter must lie in (0, 1)");
}

inline double fbm_covariance(double s, double t, double hurst) {
  require_hurst(hurst);
  if (hurst == 0.5) return std::min(s, t);
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
}

inline LogTail fbm_marginal_log_tail(double t, double b, double hurst) {
  require_time(t, "fbm_marginal_log_tail");
  require_hurst(hurst);
  return log_normal_tail(b / std::pow(t, hurst));
}

/// P(tau_b <= t) for Brownian motion, by reflection.
inline double bm_first_passage_cdf(double t, double b) {
  require_time(t, "bm_first_passage_cdf");
  if (!(b > 0.0)) throw std::domain_error("bm_first_passage_cdf: b must be positive");
  return 2.0 * normal_tail(b / std::sqrt(t));
}

inline double log_bm_first_passage_cdf(double t, double b) {
  require_time(t, "bm_first_passage_cdf");
  if (!(b > 0.0)) throw std::domain_error("bm_first_passage_cdf: b must be positive");
  return std::log(2.0) + log_normal_tail(b / std::sqrt(t)).value();
}

/// Immutable description of one of the supported processes on [0, 1].
class ProcessSpec {
 public:
  static ProcessSpec bm() { return ProcessSpec(ProcessKind::BM, 0.0, 0.5); }
  static ProcessSpec bm_jumps(double rate) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw std::domain_error("BM with jumps: rate must be >= 0");
    return ProcessSpec(ProcessKind::BMJumps, rate, 0.5);
  }
  static ProcessSpec ou() { return ProcessSpec(ProcessKind::OU, 0.0, 0.5); }
  static ProcessSpec fbm(double hurst) {
    require_hurst(hurst);
    return ProcessSpec(ProcessKind::FBM, 0.0, hurst);
  }

  ProcessKind kind() const noexcept { return kind_; }
  double rate() const noexcept { return rate_; }
  double hurst() const noexcept { return hurst_; }

  /// Gaussian kinds have a covariance kernel and zero mean.
  bool is_gaussian() const noexcept { return kind_ != ProcessKind::BMJumps; }

  /// argmax_t P(X_t > b). Every supported marginal tail is strictly
  /// increasing in t, so this is always the right end point.
  double tail_argmax() const noexcept { return 1.0; }

  LogTail marginal_log_tail(double t, double b) const {
    switch (kind_) {
      case ProcessKind::BM: return bm_marginal_log_tail(t, b);
      case ProcessKind::BMJumps: return bmjumps_marginal_log_tail(t, b, rate_);
      case ProcessKind::OU: return ou_marginal_log_tail(t, b);
      case ProcessKind::FBM: return fbm_marginal_log_tail(t, b, hurst_);
    }
    throw std::logic_error("unknown process kind");
  }

  /// Covariance kernel of the Gaussian part. For BM with jumps this is the
  /// Brownian component only.
  double covariance(double s, double t) const {
    switch (kind_) {
      case ProcessKind::BM:
      case ProcessKind::BMJumps: return std::min(s, t);
      case ProcessKind::OU: return ou_covariance(s, t);
      case ProcessKind::FBM: return fbm_covariance(s, t, hurst_);
    }
    throw std::logic_error("unknown process kind");
  }

  /// Marginal standard deviation of the Gaussian part at time t.
  double marginal_sd(double t) const {
    switch (kind_) {
      case ProcessKind::BM:
      case ProcessKind::BMJumps: return std::sqrt(t);
      case ProcessKind::OU: return std::sqrt(ou_variance(t));
      case ProcessKind::FBM: return std::pow(t, hurst_);
    }
    throw std::logic_error("unknown process kind");
  }

  /// Short identifier: bm, bmjumps(rate=1), ou, fbm(H=0.4).
  std::string name() const {
    auto fmt = [](double v) {
      std::string s = std::to_string(v);
      s.erase(s.find_last_not_of('0') + 1);
      if (!s.empty() && s.back() == '.') s.pop_back();
      return s;
    };
    switch (kind_) {
      case ProcessKind::BM: return "bm";
      case ProcessKind::BMJumps: return "bmjumps(rate=" + fmt(rate_) + ")";
      case ProcessKind::OU: return "ou";
      case ProcessKind::FBM: return "fbm(H=" + fmt(hurst_) + ")";
    }
    return "unknown";
  }

  friend bool operator==(const ProcessSpec&, const ProcessSpec&) = default;

 private:
  ProcessSpec(ProcessKind kind, double rate, double hurst) : kind_(kind), rate_(rate), hurst_(hurst) {
#ifndef NDEBUG
    check_monotone();
#endif
  }

#ifndef NDEBUG
  void check_monotone() const {
    for (double b : {1.0, 3.0}) {
      double prev = -std::numeric_limits<double>::infinity();
      for (int i = 1; i <= 100; ++i) {
        const double v = marginal_log_tail(i / 100.0, b).value();
        assert(v > prev && "marginal tail must increase in t");
        prev = v;
      }
    }
  }
#endif


  ProcessKind kind_;
  double rate_;
  double hurst_;
};

}  // namespace equigrid
