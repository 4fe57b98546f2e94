#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "equigrid/random.hpp"

using namespace equigrid;

namespace {

struct Moments {
  double mean = 0, var = 0;
  std::size_t n = 0;
};

template <class F>
Moments moments(std::size_t n, F&& draw) {
  double s = 0, s2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = draw();
    s += x;
    s2 += x * x;
  }
  Moments m;
  m.n = n;
  m.mean = s / static_cast<double>(n);
  m.var = (s2 - s * m.mean) / static_cast<double>(n - 1);
  return m;
}

double se(const Moments& m) { return std::sqrt(m.var / static_cast<double>(m.n)); }

}  // namespace

TEST(SeededRng, SameIdsSameSequence) {
  SeededRng a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a.uniform(), b.uniform());
    ASSERT_EQ(a.normal(), b.normal());
  }
}

TEST(SeededRng, DistinctStreamsDiffer) {
  SeededRng a(42, 0), b(42, 1), c(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    same_ab += x == b.uniform();
    same_ac += x == c.uniform();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(SeededRng, StreamsUncorrelated) {
  SeededRng a(5, 0), b(5, 1);
  const std::size_t n = 200000;
  double sxy = 0;
  for (std::size_t i = 0; i < n; ++i) sxy += a.normal() * b.normal();
  EXPECT_LT(std::fabs(sxy / n), 4.0 / std::sqrt(double(n)));
}

TEST(SeededRng, UniformOpenInterval) {
  SeededRng r(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(DeriveSeed, Distinct) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(9, 3), derive_seed(9, 3));
}

TEST(TruncatedNormal, Support) {
  SeededRng r(3);
  for (double lower : {-3.0, 0.0, 0.5, 2.9, 3.1, 10.0, 40.0})
    for (int i = 0; i < 20000; ++i) ASSERT_GE(sample_truncated_normal_tail(r, 1.0, 2.0, lower), lower);
}

TEST(TruncatedNormal, NoBoundIsPlainNormal) {
  SeededRng r(4);
  const double ninf = -std::numeric_limits<double>::infinity();
  auto m = moments(1000000, [&] { return sample_truncated_normal_tail(r, 0.0, 1.0, ninf); });
  EXPECT_NEAR(m.mean, 0.0, 4 * se(m));
  EXPECT_NEAR(m.var, 1.0, 4 * std::sqrt(2.0 / m.n));
}

TEST(TruncatedNormal, DeepTailMean) {
  SeededRng r(5);
  auto m = moments(1000000, [&] { return sample_truncated_normal_tail(r, 0.0, 1.0, 8.0); });
  // E[Z | Z > 8] = phi(8) / Phi(-8), 40-digit reference.
  EXPECT_NEAR(m.mean, 8.121368112236112680653520, 4 * se(m));
}

TEST(TruncatedNormal, ModerateBoundsMatchMillsMoments) {
  SeededRng r(6);
  for (double a : {-1.0, 0.0, 1.5, 3.0, 5.0}) {
    auto m = moments(400000, [&] { return sample_truncated_normal_tail(r, 2.0, 0.5, 2.0 + 0.5 * a); });
    const double lam = normal_pdf(a) / normal_tail(a);
    EXPECT_NEAR(m.mean, 2.0 + 0.5 * lam, 4 * se(m)) << a;
    const double var = 0.25 * (1.0 + a * lam - lam * lam);
    EXPECT_NEAR(m.var, var, 5 * var * std::sqrt(4.0 / m.n)) << a;
  }
}

TEST(TruncatedNormal, RejectsBadScale) {
  SeededRng r(1);
  EXPECT_THROW(sample_truncated_normal_tail(r, 0.0, 0.0, 1.0), std::domain_error);
}

TEST(Poisson, ZeroRate) {
  SeededRng r(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_poisson(r, 0.0), 0);
  EXPECT_THROW(sample_poisson(r, -1.0), std::domain_error);
}

TEST(Poisson, Moments) {
  SeededRng r(8);
  auto m = moments(1000000, [&] { return static_cast<double>(sample_poisson(r, 1.0)); });
  EXPECT_NEAR(m.mean, 1.0, 4e-3);
  EXPECT_NEAR(m.var, m.mean, 8e-3);
}
