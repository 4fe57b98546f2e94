#include <cmath>
#include <memory>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "equigrid/gausspath.hpp"

using namespace equigrid;

namespace {

Grid grid_of(std::vector<double> t) {
  Grid g;
  g.points = std::move(t);
  return g;
}

// Empirical mean and covariance with entrywise standard errors.
struct Empirical {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov, cov_se;
};

template <class Draw>
Empirical empirical(std::size_t n, std::size_t draws, Draw&& draw) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::VectorXd> xs;
  xs.reserve(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    xs.push_back(draw());
    s += xs.back();
  }
  Empirical e;
  e.mean = s / double(draws);
  e.cov = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(n, n);
  for (const auto& x : xs) {
    const Eigen::VectorXd d = x - e.mean;
    const Eigen::MatrixXd p = d * d.transpose();
    e.cov += p;
    sq += p.cwiseProduct(p);
  }
  e.cov /= double(draws - 1);
  // se of a sample covariance entry: sqrt(Var(d_i d_j) / draws).
  e.cov_se = ((sq / double(draws) - e.cov.cwiseProduct(e.cov)) / double(draws)).cwiseSqrt();
  return e;
}

}  // namespace

TEST(Assemble, BmCovarianceAndIncrementFactor) {
  const auto d = PathDistribution::assemble(equidistant(4), ProcessSpec::bm());
  EXPECT_TRUE(d.uses_increments());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      EXPECT_DOUBLE_EQ(d.covariance()(i, j), std::min(i + 1, j + 1) / 4.0);
      // L_ij = sqrt(t_j - t_{j-1}) for j <= i.
      EXPECT_NEAR(d.factor()(i, j), j <= i ? 0.5 : 0.0, 1e-15);
    }
  EXPECT_NEAR((d.factor() * d.factor().transpose() - d.covariance()).norm(), 0.0, 1e-14);
  EXPECT_EQ(d.jitter_used(), 0.0);
}

TEST(Assemble, SinglePoint) {
  const auto d = PathDistribution::assemble(equidistant(1), ProcessSpec::ou());
  ASSERT_EQ(d.covariance().rows(), 1);
  EXPECT_NEAR(d.covariance()(0, 0), ou_variance(1.0), 1e-15);
}

TEST(Assemble, FactorReproducesCovariance) {
  for (const auto& p : {ProcessSpec::ou(), ProcessSpec::fbm(0.4), ProcessSpec::fbm(0.6)}) {
    const auto d = PathDistribution::assemble(make_grid(GridFamily::ThresholdDependentBM, 100, 8.0, p), p);
    const Eigen::MatrixXd target =
        d.covariance() + d.jitter_used() * Eigen::MatrixXd::Identity(d.size(), d.size());
    const double rel = (d.factor() * d.factor().transpose() - target).norm() / target.norm();
    EXPECT_LT(rel, 1e-8) << p.name();
    EXPECT_LE(d.jitter_used(), 1e-10) << p.name();
  }
}

TEST(Assemble, DuplicatePointsFail) {
  EXPECT_THROW(PathDistribution::assemble(grid_of({0.5, 0.5, 1.0}), ProcessSpec::fbm(0.6)), std::runtime_error);
}

TEST(SamplePath, BmMoments) {
  const auto d = PathDistribution::assemble(equidistant(4), ProcessSpec::bm());
  SeededRng rng(10);
  const auto e = empirical(4, 100000, [&] { return d.sample_path(rng); });
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(e.mean(i), 0.0, 4 * std::sqrt(d.covariance()(i, i) / 100000));
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(e.cov(i, j), d.covariance()(i, j), 4 * e.cov_se(i, j)) << i << j;
  }
}

TEST(SamplePath, FactorPathMoments) {
  const auto p = ProcessSpec::fbm(0.4);
  const auto d = PathDistribution::assemble(grid_of({0.2, 0.5, 0.6, 1.0}), p);
  EXPECT_FALSE(d.uses_increments());
  SeededRng rng(11);
  const auto e = empirical(4, 100000, [&] { return d.sample_path(rng); });
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(e.cov(i, j), d.covariance()(i, j), 4 * e.cov_se(i, j)) << i << j;
}

TEST(Conditional, PinnedCoordinateExact) {
  auto d = std::make_shared<const PathDistribution>(PathDistribution::assemble(equidistant(5), ProcessSpec::ou()));
  SeededRng rng(1);
  for (std::size_t k = 0; k < 5; ++k) {
    ConditionalSampler cs(d, k);
    for (double x : {-1.0, 0.3, 7.25}) EXPECT_EQ(cs.sample_conditional(rng, x)(k), x);
  }
  EXPECT_THROW(ConditionalSampler(d, 5), std::out_of_range);
}

TEST(Conditional, BrownianBridgeMoments) {
  auto d = std::make_shared<const PathDistribution>(
      PathDistribution::assemble(grid_of({0.5, 1.0}), ProcessSpec::bm()));
  ConditionalSampler cs(d, 1);
  SeededRng rng(12);
  const double b = 2.0;
  const auto e = empirical(2, 100000, [&] { return cs.sample_conditional(rng, b); });
  EXPECT_NEAR(e.mean(0), b / 2, 4 * std::sqrt(0.25 / 100000));
  EXPECT_NEAR(e.cov(0, 0), 0.25, 4 * e.cov_se(0, 0));
}

TEST(Conditional, SchurComplementOracle) {
  SeededRng rng(13);
  for (const auto& p : {ProcessSpec::bm(), ProcessSpec::ou(), ProcessSpec::fbm(0.3)}) {
    const Grid g = grid_of({0.15, 0.4, 0.7, 1.0});
    auto d = std::make_shared<const PathDistribution>(PathDistribution::assemble(g, p));
    const Eigen::MatrixXd& S = d->covariance();
    for (int k = 0; k < 4; ++k) {
      ConditionalSampler cs(d, k);
      const double x = 1.3;
      // Independent oracle: conditional law by explicit partitioned inverse.
      Eigen::VectorXd m = S.col(k) / S(k, k) * x;
      Eigen::MatrixXd C = S - S.col(k) * S.row(k) / S(k, k);
      const auto e = empirical(4, 100000, [&] { return cs.sample_conditional(rng, x); });
      for (int i = 0; i < 4; ++i) {
        if (i == k) continue;
        EXPECT_NEAR(e.mean(i), m(i), 4 * std::sqrt(C(i, i) / 100000)) << p.name() << k << i;
        for (int j = 0; j < 4; ++j) {
          if (j == k) continue;
          EXPECT_NEAR(e.cov(i, j), C(i, j), 4 * e.cov_se(i, j)) << p.name() << k << i << j;
        }
      }
    }
  }
}

TEST(Conditional, SharesOneFactorization) {
  auto d = std::make_shared<const PathDistribution>(PathDistribution::assemble(equidistant(6), ProcessSpec::ou()));
  ConditionalSampler a(d, 0), b(d, 5);
  EXPECT_EQ(&a.base(), &b.base());
  EXPECT_EQ(&a.base().factor(), &d->factor());
}

TEST(Conditional, Deterministic) {
  auto d = std::make_shared<const PathDistribution>(PathDistribution::assemble(equidistant(6), ProcessSpec::fbm(0.7)));
  ConditionalSampler cs(d, 3);
  SeededRng r1(5, 2), r2(5, 2);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(cs.sample_conditional(r1, 2.0), cs.sample_conditional(r2, 2.0));
}
