#pragma once

// Quadrature ground truth for w_T(b) on Brownian grids with at most three
// points. Used to validate the Monte Carlo estimators; not a general solver.

#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "equigrid/grids.hpp"
#include "equigrid/specfun.hpp"

namespace equigrid {

namespace detail {

inline double integrate_half_line(auto&& f, double split) {
  using boost::math::quadrature::gauss_kronrod;
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr double tol = 1e-13;
  double err = 0.0;
  const double head = gauss_kronrod<double, 61>::integrate(f, 0.0, split, 20, tol, &err);
  const double tail = gauss_kronrod<double, 61>::integrate(f, split, inf, 20, tol, &err);
  return head + tail;
}

}  // namespace detail

/// w_T(b) / P(B_{t_n} > b) for a Brownian grid of size <= 3, computed by
/// splitting on the last grid point above b:
///   w_T = P(X_n > b) + P(X_{n-1} > b, X_n <= b) + P(X_{n-2} > b, X_{n-1} <= b, X_n <= b)
/// with each joint term reduced to nested one-dimensional integrals.
inline double quasi_exact_wT_bm_scaled(const Grid& grid, double b) {
  const std::size_t n = grid.size();
  if (n == 0) throw std::invalid_argument("quasi_exact_wT_bm: empty grid");
  if (n > 3) throw std::invalid_argument("quasi_exact_wT_bm: at most 3 grid points are supported");
  if (!std::isfinite(b)) throw std::domain_error("quasi_exact_wT_bm: b must be finite");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(grid[i] > 0.0 && grid[i] <= 1.0)) throw std::domain_error("quasi_exact_wT_bm: times must lie in (0, 1]");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw std::domain_error("quasi_exact_wT_bm: times must increase");
  }

  const double log_ref = log_normal_tail(b / std::sqrt(grid[n - 1])).value();
  // Density of B_t at b + s relative to the reference tail.
  auto scaled_density = [&](double t, double s) {
    const double st = std::sqrt(t);
    return std::exp(log_normal_pdf((b + s) / st) - std::log(st) - log_ref);
  };
  // Integration split point: a few natural widths of the overshoot.
  auto split_for = [&](double t) {
    const double scale = b > 1.0 ? t / b : std::sqrt(t);
    return std::max(0.0, -b) + 6.0 * scale;
  };

  double total = 1.0;
  if (n >= 2) {
    const double ti = grid[n - 2];
    const double sd = std::sqrt(grid[n - 1] - ti);
    total += detail::integrate_half_line(
        [&](double s) { return scaled_density(ti, s) * normal_tail(s / sd); }, split_for(ti));
  }
  if (n == 3) {
    const double ti = grid[0];
    const double sd1 = std::sqrt(grid[1] - grid[0]);
    const double sd2 = std::sqrt(grid[2] - grid[1]);
    // P(X_2 <= b, X_3 <= b | X_1 = b + s): integrate over X_2 = b - r.
    auto inner = [&](double s) {
      auto g = [&](double r) { return normal_pdf((r + s) / sd1) / sd1 * normal_cdf(r / sd2); };
      return detail::integrate_half_line(g, std::max(sd1, sd2) * 4.0);
    };
    total += detail::integrate_half_line([&](double s) { return scaled_density(ti, s) * inner(s); }, split_for(ti));
  }
  return total;
}

/// w_T(b) = P(max_{t in T} B_t > b) for |T| <= 3.
inline double quasi_exact_wT_bm(const Grid& grid, double b) {
  if (grid.size() == 0) throw std::invalid_argument("quasi_exact_wT_bm: empty grid");
  return quasi_exact_wT_bm_scaled(grid, b) * normal_tail(b / std::sqrt(grid.points.back()));
}

}  // namespace equigrid
