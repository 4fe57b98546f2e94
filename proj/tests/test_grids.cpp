#include <cmath>

#include <gtest/gtest.h>

#include "equigrid/grids.hpp"

using namespace equigrid;

namespace {

// Bisection on Phi(-b / sd(t)) = frac * Phi(-b / sd(1)) using erfc directly.
template <class Sd>
double bisect_equiprobable(double b, double frac, Sd sd) {
  auto tail = [](double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); };
  const double target = frac * tail(b / sd(1.0));
  double lo = 1e-9, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (tail(b / sd(mid)) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Equidistant, Points) {
  EXPECT_EQ(equidistant(1).points, std::vector<double>{1.0});
  EXPECT_EQ(equidistant(4).points, (std::vector<double>{0.25, 0.5, 0.75, 1.0}));
  const Grid g = equidistant(100);
  ASSERT_EQ(g.size(), 100u);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] - g[i - 1], 0.01, 1e-15);
  EXPECT_EQ(g.points.back(), 1.0);
  EXPECT_THROW(equidistant(0), std::invalid_argument);
}

TEST(ThresholdGrid, LastPointIsOne) {
  for (double b : {2.0, 5.0, 12.0, 40.0}) {
    const Grid g = threshold_dependent_bm(7, b);
    EXPECT_EQ(g.points.back(), 1.0);
    EXPECT_TRUE(validate(g).empty()) << b;
  }
}

TEST(ThresholdGrid, BelowB0IsEquidistant) {
  const Grid g = threshold_dependent_bm(10, 1.5);
  EXPECT_EQ(g.points, equidistant(10).points);
  EXPECT_EQ(g.family, GridFamily::ThresholdDependentBM);
  EXPECT_EQ(threshold_dependent_bm(10, 2.5, 3.0).points, equidistant(10).points);
  EXPECT_NE(threshold_dependent_bm(10, 2.5, 2.0).points, equidistant(10).points);
}

TEST(ThresholdGrid, TwoPointsAtThree) {
  const double oracle = bisect_equiprobable(3.0, 0.5, [](double t) { return std::sqrt(t); });
  const Grid g = threshold_dependent_bm(2, 3.0);
  EXPECT_NEAR(g[0], oracle, 1e-10);
  EXPECT_NEAR(g[0], 0.87608139526476612, 1e-10);  // 40-digit reference
}

TEST(ThresholdGrid, EquiprobableProperty) {
  for (double b : {2.0, 3.0, 8.0, 20.0, 38.5})
    for (std::size_t n : {2u, 10u, 100u}) {
      const Grid g = threshold_dependent_bm(n, b);
      const double log_end = log_bm_first_passage_cdf(1.0, b);
      for (std::size_t k = 1; k <= n; ++k)
        EXPECT_NEAR(std::exp(log_bm_first_passage_cdf(g[k - 1], b) - log_end), double(k) / n, 1e-9)
            << "b=" << b << " n=" << n << " k=" << k;
    }
}

TEST(ThresholdGrid, ClusteringNearOne) {
  const std::size_t n = 10;
  for (std::size_t k = 1; k < n; ++k) {
    const double limit = -2.0 * std::log(double(k) / n);
    double prev_err = INFINITY;
    for (double b : {10.0, 20.0, 40.0}) {
      const Grid g = threshold_dependent_bm(n, b);
      const double err = std::fabs(b * b * (1.0 - g[k - 1]) / limit - 1.0);
      EXPECT_LT(err, prev_err) << "k=" << k << " b=" << b;
      prev_err = err;
    }
    EXPECT_LT(prev_err, 0.05) << "k=" << k;
  }
}

TEST(ThresholdGrid, PointsShiftTowardOneAsBGrows) {
  const std::size_t n = 8;
  for (std::size_t k = 1; k < n; ++k) {
    double prev = threshold_dependent_bm(n, 2.0)[k - 1];
    for (double b = 3.0; b <= 10.0; b += 1.0) {
      const double cur = threshold_dependent_bm(n, b)[k - 1];
      EXPECT_GT(cur, prev) << "k=" << k << " b=" << b;
      prev = cur;
    }
  }
}

TEST(EquiprobableGeneral, AgreesWithClosedFormForBm) {
  for (double b : {3.0, 8.0, 20.0})
    for (std::size_t n : {2u, 10u, 100u}) {
      const Grid a = threshold_dependent_bm(n, b);
      const Grid g = equiprobable_general(n, b, ProcessSpec::bm());
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(a[i], g[i], 1e-9) << b << ' ' << n << ' ' << i;
      EXPECT_EQ(g.points.back(), 1.0);
    }
}

TEST(EquiprobableGeneral, SinglePoint) {
  EXPECT_EQ(equiprobable_general(1, 4.0, ProcessSpec::ou()).points, std::vector<double>{1.0});
}

TEST(EquiprobableGeneral, FbmTwoPoints) {
  const double oracle = bisect_equiprobable(3.0, 0.5, [](double t) { return std::pow(t, 0.6); });
  const Grid g = equiprobable_general(2, 3.0, ProcessSpec::fbm(0.6));
  EXPECT_NEAR(g[0], oracle, 1e-10);
  EXPECT_NEAR(g[0], 0.89561298458927351, 1e-10);  // 40-digit reference
}

TEST(EquiprobableGeneral, OuDefiningProperty) {
  const auto ou = ProcessSpec::ou();
  const Grid g = equiprobable_general(20, 4.0, ou);
  EXPECT_TRUE(validate(g).empty());
  const double log_end = ou.marginal_log_tail(1.0, 4.0).value();
  for (std::size_t k = 1; k <= 20; ++k)
    EXPECT_NEAR(std::exp(ou.marginal_log_tail(g[k - 1], 4.0).value() - log_end), k / 20.0, 1e-9);
}

TEST(EquiprobableGeneral, FailsWithoutBracket) {
  // At b <= 0 the marginal tail is flat at 1/2 in t.
  EXPECT_THROW(equiprobable_general(4, 0.0, ProcessSpec::bm()), std::runtime_error);
}

TEST(Optimal2, Values) {
  const Grid g = optimal_2grid(1.0);
  ASSERT_EQ(g.size(), 2u);
  const double direct = (M_PI / 4.0) * (std::sqrt(1.0 + 8.0 / M_PI) - 1.0);
  EXPECT_NEAR(g[0], direct, 1e-15);
  EXPECT_NEAR(g[0], 0.69367134202242260, 1e-14);
  EXPECT_EQ(g[1], 1.0);
  EXPECT_NEAR(optimal_2grid(1e4)[0], 1.0, 1e-7);
  EXPECT_LT(optimal_2grid(1e4)[0], 1.0);
  EXPECT_THROW(optimal_2grid(0.0), std::domain_error);
}

TEST(Validate, ReportsAllViolations) {
  Grid g;
  EXPECT_EQ(validate(g).size(), 1u);
  g.points = {0.5, 0.4, 1.2};
  const auto v = validate(g);
  EXPECT_EQ(v.size(), 3u);  // out of range, not increasing, last != 1
  g.points = {0.5, 0.5 + 1e-17, 1.0};
  EXPECT_FALSE(validate(g).empty());
  g.points = {0.0, 1.0};
  EXPECT_FALSE(validate(g).empty());
  EXPECT_TRUE(validate(equidistant(5)).empty());
}

TEST(GridFamilyNames, RoundTrip) {
  for (auto f : {GridFamily::Equidistant, GridFamily::ThresholdDependentBM, GridFamily::EquiprobableGeneral,
                 GridFamily::Optimal2})
    EXPECT_EQ(grid_family_from_string(to_string(f)), f);
  EXPECT_THROW(grid_family_from_string("bogus"), std::invalid_argument);
}

TEST(MakeGrid, ThresholdFamilyUsesRootFindingForOtherProcesses) {
  const Grid g = make_grid(GridFamily::ThresholdDependentBM, 5, 3.0, ProcessSpec::ou());
  EXPECT_EQ(g.family, GridFamily::EquiprobableGeneral);
  EXPECT_THROW(make_grid(GridFamily::Optimal2, 3, 3.0, ProcessSpec::bm()), std::invalid_argument);
}
