#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "equigrid/specfun.hpp"

using namespace equigrid;

namespace {

// Reference tail independent of the library's branch structure.
double erfc_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace

TEST(NormalPdf, KnownValues) {
  EXPECT_NEAR(normal_pdf(0.0), 0.3989422804014327, 1e-16);
  EXPECT_NEAR(normal_pdf(3.0) / 0.004431848411938007175602, 1.0, 1e-14);
  EXPECT_EQ(normal_pdf(3.0), normal_pdf(-3.0));
}

TEST(NormalTail, KnownValues) {
  EXPECT_EQ(normal_tail(0.0), 0.5);
  EXPECT_NEAR(normal_tail(3.0) / 1.3498980316300945e-3, 1.0, 1e-13);
  // mpmath, 40 digits
  EXPECT_NEAR(log_normal_tail(40.0).value() / -804.60844201375378816660, 1.0, 1e-13);
  EXPECT_NEAR(log_normal_tail(4.0).value() / -10.360101486527290827860, 1.0, 1e-13);
}

TEST(NormalTail, RelativeAccuracyAgainstErfc) {
  for (double x = -8.0; x <= 26.0; x += 0.125)
    EXPECT_NEAR(normal_tail(x) / erfc_tail(x), 1.0, 1e-12) << x;
}

TEST(NormalTail, Monotone) {
  // Below about -8.3 the linear tail rounds to 1; the log tail still resolves it.
  double prev = normal_tail(-8.0);
  for (double x = -7.9; x <= 37.0; x += 0.1) {
    const double cur = normal_tail(x);
    EXPECT_LT(cur, prev) << x;
    prev = cur;
  }
  double lprev = log_normal_tail(-10.0).value();
  for (double x = -9.9; x <= 60.0; x += 0.1) {
    const double cur = log_normal_tail(x).value();
    EXPECT_LT(cur, lprev) << x;
    lprev = cur;
  }
}

TEST(NormalTail, LogConsistency) {
  for (double x = -10.0; x <= 35.0; x += 0.25)
    EXPECT_NEAR(std::exp(log_normal_tail(x).value()) / normal_tail(x), 1.0, 1e-12) << x;
}

TEST(NormalTail, LogContinuityAcrossBranches) {
  for (double x : {-5.0, 37.0}) {
    const double lo = log_normal_tail(std::nextafter(x, -100.0)).value();
    const double hi = log_normal_tail(x).value();
    EXPECT_NEAR(lo, hi, 1e-12 * std::max(1.0, std::fabs(hi)));
  }
}

TEST(NormalTail, MillsRatioSandwich) {
  for (double x = 0.05; x <= 40.0; x += 0.05) {
    const double r = std::exp(log_normal_tail(x).value() - log_normal_pdf(x));
    const double tol = 1e-13 * r;
    EXPECT_LE(x / (1.0 + x * x), r + tol) << x;
    EXPECT_LE(r, 1.0 / x + tol) << x;
    EXPECT_LE(2.0 / (x + std::sqrt(x * x + 4.0)), r + tol) << x;
    EXPECT_LE(r, 4.0 / (3.0 * x + std::sqrt(x * x + 8.0)) + tol) << x;
  }
}

TEST(LogTail, RejectsInvalid) {
  EXPECT_THROW(LogTail(0.1), std::domain_error);
  EXPECT_THROW(LogTail(std::nan("")), std::domain_error);
  EXPECT_NO_THROW(LogTail(0.0));
  EXPECT_NO_THROW(LogTail(-std::numeric_limits<double>::infinity()));
}

TEST(TailInverse, KnownValues) {
  EXPECT_NEAR(normal_tail_inverse(0.5), 0.0, 1e-15);
  EXPECT_NEAR(normal_tail_inverse(1.3498980316300945e-3), 3.0, 1e-9);
  EXPECT_NEAR(log_tail_inverse(log_normal_tail(7.0)), 7.0, 1e-9);
  EXPECT_THROW(normal_tail_inverse(0.0), std::domain_error);
  EXPECT_THROW(normal_tail_inverse(1.0), std::domain_error);
  EXPECT_THROW(normal_tail_inverse(std::nan("")), std::domain_error);
}

TEST(TailInverse, RoundTrip) {
  for (double x = -8.0; x <= 38.0; x += 0.01) EXPECT_NEAR(log_tail_inverse(log_normal_tail(x)), x, 1e-8) << x;
  // Near p = 1 the spacing of doubles divided by phi(x) exceeds 1e-8 once
  // x < -5.5, so the linear route starts there.
  for (double x = -5.5; x <= 38.0; x += 0.01) EXPECT_NEAR(normal_tail_inverse(normal_tail(x)), x, 1e-8) << x;
}

TEST(TailInverse, RelativeAccuracyInProbability) {
  for (double p : {0.9, 0.5, 0.3, 1e-3, 1e-10, 1e-100, 1e-300}) {
    const double x = normal_tail_inverse(p);
    EXPECT_NEAR(normal_tail(x) / p, 1.0, 1e-12) << p;
  }
}

TEST(TailInverse, DeepLogDomain) {
  for (double lp = -1.0; lp >= -2000.0; lp -= 7.3) {
    const double x = log_tail_inverse(LogTail(lp));
    EXPECT_NEAR(log_normal_tail(x).value(), lp, 1e-12 * std::fabs(lp)) << lp;
  }
}

TEST(LogArithmetic, AddSub) {
  EXPECT_NEAR(log_add_exp(std::log(0.25), std::log(0.5)), std::log(0.75), 1e-15);
  EXPECT_NEAR(log_sub_exp(std::log(0.75), std::log(0.5)), std::log(0.25), 1e-15);
  const double ninf = -std::numeric_limits<double>::infinity();
  EXPECT_EQ(log_add_exp(ninf, -3.0), -3.0);
  EXPECT_NEAR(log_add_exp(-1000.0, -1000.0), -1000.0 + std::log(2.0), 1e-12);
}
