#pragma once

// Grid families on (0, 1]: equidistant, threshold-dependent for Brownian
// motion (closed form), equiprobable for general processes (root finding),
// and the optimal two-point grid.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "equigrid/specfun.hpp"
#include "equigrid/stochastic.hpp"

namespace equigrid {

enum class GridFamily { Equidistant, ThresholdDependentBM, EquiprobableGeneral, Optimal2 };

inline std::string_view to_string(GridFamily f) {
  switch (f) {
    case GridFamily::Equidistant: return "equidistant";
    case GridFamily::ThresholdDependentBM: return "threshold";
    case GridFamily::EquiprobableGeneral: return "equiprobable";
    case GridFamily::Optimal2: return "optimal2";
  }
  return "unknown";
}

inline GridFamily grid_family_from_string(std::string_view s) {
  if (s == "equidistant") return GridFamily::Equidistant;
  if (s == "threshold") return GridFamily::ThresholdDependentBM;
  if (s == "equiprobable") return GridFamily::EquiprobableGeneral;
  if (s == "optimal2") return GridFamily::Optimal2;
  throw std::invalid_argument("unknown grid family: " + std::string(s));
}

/// Default cut-over threshold below which the threshold-dependent grid is
/// the equidistant one.
inline const double kDefaultB0 = std::numbers::sqrt3;

/// Points closer than this are treated as duplicates.
inline constexpr double kMinGridSpacing = 1e-15;

/// Ordered set of times t_1 < ... < t_n in (0, 1].
struct Grid {
  std::vector<double> points;
  GridFamily family = GridFamily::Equidistant;
  std::optional<double> threshold_used;

  std::size_t size() const noexcept { return points.size(); }
  double operator[](std::size_t i) const { return points[i]; }

  bool contains(double t) const {
    for (double p : points)
      if (p == t) return true;
    return false;
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

inline Grid equidistant(std::size_t n) {
  if (n == 0) throw std::invalid_argument("equidistant: n must be >= 1");
  Grid g;
  g.family = GridFamily::Equidistant;
  g.points.resize(n);
  for (std::size_t k = 1; k <= n; ++k) g.points[k - 1] = static_cast<double>(k) / static_cast<double>(n);
  return g;
}

/// Threshold-dependent grid for Brownian motion:
///   t_k = (b / Phi^{-1}((k/n) Phi(-b)))^2   for b > b0,
///   t_k = k/n                               otherwise.
/// The quantile is taken entirely in log-tail space so the construction
/// works for thresholds where (k/n) Phi(-b) underflows.
inline Grid threshold_dependent_bm(std::size_t n, double b, double b0 = kDefaultB0) {
  if (n == 0) throw std::invalid_argument("threshold_dependent_bm: n must be >= 1");
  if (!std::isfinite(b)) throw std::domain_error("threshold_dependent_bm: b must be finite");
  if (!(b0 > 0.0)) throw std::domain_error("threshold_dependent_bm: b0 must be positive");
  Grid g = equidistant(n);
  g.family = GridFamily::ThresholdDependentBM;
  g.threshold_used = b;
  if (b <= b0) return g;

  const double log_tail_b = log_normal_tail(b).value();
  const double dn = static_cast<double>(n);
  for (std::size_t k = 1; k < n; ++k) {
    const double target = std::log(static_cast<double>(k) / dn) + log_tail_b;
    const double z = log_tail_inverse(LogTail(target));
    const double r = b / z;
    g.points[k - 1] = r * r;
  }
  g.points[n - 1] = 1.0;
  return g;
}

/// Equiprobable grid for a process with strictly increasing marginal tail:
/// t_k solves P(X_{t_k} > b) = (k/n) P(X_1 > b). Each root is bracketed in
/// (0, 1] and refined by bisection on the log tail to |dt| <= 1e-12.
inline Grid equiprobable_general(std::size_t n, double b, const ProcessSpec& process) {
  if (n == 0) throw std::invalid_argument("equiprobable_general: n must be >= 1");
  if (!std::isfinite(b)) throw std::domain_error("equiprobable_general: b must be finite");
  Grid g;
  g.family = GridFamily::EquiprobableGeneral;
  g.threshold_used = b;
  g.points.resize(n);

  const double log_end = process.marginal_log_tail(1.0, b).value();
  const double dn = static_cast<double>(n);
  constexpr double kTiny = 1e-12;
  const double log_tiny = process.marginal_log_tail(kTiny, b).value();

  double lo_floor = 0.0;  // roots are increasing in k
  for (std::size_t k = 1; k < n; ++k) {
    const double target = std::log(static_cast<double>(k) / dn) + log_end;
    if (!(log_tiny < target) || !(log_end > target))
      throw std::runtime_error("equiprobable_general: cannot bracket root (marginal tail not increasing in t at b=" +
                               std::to_string(b) + ")");
    double lo = lo_floor;
    double hi = 1.0;
    while (hi - lo > 1e-13) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= 0.0) break;
      if (process.marginal_log_tail(mid, b).value() < target)
        lo = mid;
      else
        hi = mid;
    }
    g.points[k - 1] = 0.5 * (lo + hi);
    lo_floor = lo;
  }
  g.points[n - 1] = 1.0;
  return g;
}

/// Optimal two-point grid {t1*, 1} with
///   t1* = (pi b^2 / 4)(sqrt(1 + 8/(pi b^2)) - 1),
/// evaluated in the cancellation-free form 2 / (sqrt(1 + 8/(pi b^2)) + 1).
inline Grid optimal_2grid(double b) {
  if (!(b > 0.0) || !std::isfinite(b)) throw std::domain_error("optimal_2grid: b must be positive");
  Grid g;
  g.family = GridFamily::Optimal2;
  g.threshold_used = b;
  const double root = std::sqrt(1.0 + 8.0 / (std::numbers::pi * b * b));
  g.points = {2.0 / (root + 1.0), 1.0};
  return g;
}

/// Checks the grid invariants and returns every violation found (empty when
/// the grid is valid).
inline std::vector<std::string> validate(const Grid& grid) {
  std::vector<std::string> out;
  if (grid.points.empty()) {
    out.emplace_back("grid is empty");
    return out;
  }
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    const double t = grid.points[i];
    if (!std::isfinite(t) || t <= 0.0 || t > 1.0)
      out.push_back("point " + std::to_string(i) + " outside (0, 1]: " + std::to_string(t));
    if (i > 0) {
      const double gap = t - grid.points[i - 1];
      if (!(gap > 0.0))
        out.push_back("points " + std::to_string(i - 1) + " and " + std::to_string(i) + " not strictly increasing");
      else if (gap < kMinGridSpacing)
        out.push_back("points " + std::to_string(i - 1) + " and " + std::to_string(i) + " closer than 1e-15");
    }
  }
  if (grid.points.back() != 1.0) out.emplace_back("last point is not 1");
  if (grid.family == GridFamily::Optimal2 && grid.points.size() != 2) out.emplace_back("optimal 2-grid must have 2 points");
  return out;
}

inline Grid make_grid(GridFamily family, std::size_t n, double b, const ProcessSpec& process, double b0 = kDefaultB0) {
  switch (family) {
    case GridFamily::Equidistant: return equidistant(n);
    case GridFamily::ThresholdDependentBM:
      if (process.kind() == ProcessKind::BM) return threshold_dependent_bm(n, b, b0);
      return equiprobable_general(n, b, process);
    case GridFamily::EquiprobableGeneral: return equiprobable_general(n, b, process);
    case GridFamily::Optimal2:
      if (n != 2) throw std::invalid_argument("optimal2 grid has exactly 2 points");
      return optimal_2grid(b);
  }
  throw std::logic_error("unknown grid family");
}

}  // namespace equigrid
