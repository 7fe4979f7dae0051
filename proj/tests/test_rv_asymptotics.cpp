#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "tiedown/rv_asymptotics.hpp"

using namespace tiedown;

TEST(RegVarying, EvalAndInverse) {
  const RegVarying a(0.5, 1.0);
  EXPECT_DOUBLE_EQ(rv_eval(a, 100.0), 10.0);
  EXPECT_DOUBLE_EQ(rv_inverse(a, 10.0), 100.0);
  EXPECT_DOUBLE_EQ(rv_inverse(RegVarying(0.5, 2.0), 2.0), 1.0);
  EXPECT_DOUBLE_EQ(rv_eval(RegVarying(0.7, 1.0), 1.0), 1.0);
  const RegVarying b(0.5, 2.0 / M_PI);
  for (double y : {1.0, 10.0, 1e6}) EXPECT_NEAR(rv_eval(b, rv_inverse(b, y)) / y, 1.0, 1e-9);
  EXPECT_THROW(rv_eval(a, 0.0), DomainError);
  EXPECT_THROW(rv_inverse(a, -1.0), DomainError);
  EXPECT_THROW(RegVarying(1.2, 1.0), DomainError);
}

TEST(RegVarying, URate) {
  const RegVarying a(0.5, 1.0);
  EXPECT_DOUBLE_EQ(u_rate(a, 100), 0.05);
  EXPECT_DOUBLE_EQ(u_rate(RegVarying(0.5, 3.0), 1), 1.5);
  double s = 0.0;
  const std::int64_t N = 1000000;
  for (std::int64_t n = 1; n <= N; ++n) s += u_rate(a, n);
  EXPECT_NEAR(s / a(double(N)), 1.0, 0.005);
}

TEST(RegVarying, SmoothnessRatioTendsToOne) {
  const RegVarying a(0.5, 1.0);
  EXPECT_NEAR(smoothness_ratio(a, 100000), 1.0, 1e-4);
}

TEST(Grid, PointsDecreaseInK) {
  const RegVarying a(0.7, 1.0);
  for (std::int64_t k = 1; k < 200; ++k) EXPECT_GT(grid_point(a, k, 1000), grid_point(a, k + 1, 1000));
}

TEST(Grid, IdentityOnWindow) {
  const RegVarying a(0.5, 1.0);
  const std::int64_t n = 100000;
  int checked = 0;
  for (std::int64_t k = 1; k <= n; ++k) {
    const double x = grid_point(a, k, n);
    if (x < 0.5 || x > 5.0) continue;
    ++checked;
    const double r = grid_identity_ratio(a, k, n);
    ASSERT_GE(r, 0.99) << k;
    ASSERT_LE(r, 1.01) << k;
  }
  EXPECT_GT(checked, 100);
}

TEST(Grid, IdentityRatioClosedForm) {
  // a(n) = √n gives x_k = n/k² and the ratio 2(k+1)²/(k(2k+1)) for every n
  const RegVarying a(0.5, 1.0);
  for (std::int64_t k : {1, 10, 141, 1000})
    for (std::int64_t n : {1000, 100000, 10000000}) {
      const double dk = static_cast<double>(k);
      EXPECT_NEAR(grid_identity_ratio(a, k, n), 2.0 * (dk + 1) * (dk + 1) / (dk * (2 * dk + 1)), 1e-12);
    }
}

TEST(Lemma22, LimitForConstantIsTruncatedMean) {
  // E(1_[c,d](Z) Z^{−1/2}) from the Lévy closed form by plain Simpson in log x
  const double c = 0.05;
  const double d = 40.0;
  const int m = 20000;
  const double a = std::log(c);
  const double b = std::log(d);
  const double h = (b - a) / m;
  double s = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double x = std::exp(a + i * h);
    const double f = std::pow(x, -0.5) * std::pow(x, -1.5) * std::exp(-1.0 / (M_PI * x)) / M_PI * x;
    s += f * ((i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  const double oracle = s * h / 3.0;
  EXPECT_NEAR(lemma22_limit(StableFamily(0.5), g_const(1.0), c, d, 1.0), oracle, 1e-6);
  EXPECT_EQ(lemma22_limit(StableFamily(0.5), g_const(1.0), c, d, 0.0), 0.0);
}

TEST(Lemma22, EmptyWindowIsFlagged) {
  const StableFamily f(0.5);
  const LogDensityTable T(f, 0.05, 0.06);
  const auto r = lemma22_sum(RegVarying(0.5, 1.0), 1, 1, {0.0, 1.0}, g_const(1.0), T, 3);
  EXPECT_TRUE(r.empty_window);
  EXPECT_EQ(r.terms, 0);
}

TEST(Lemma22, RejectsNonCoprimeDrift) {
  const StableFamily f(0.5);
  const LogDensityTable T(f, 0.05, 40.0);
  EXPECT_THROW(lemma22_sum(RegVarying(0.5, 1.0), 4, 2, {0.0, 1.0}, g_const(1.0), T, 100), DomainError);
}

TEST(Lemma22, PeriodicMatchesAperiodicTimesP) {
  const StableFamily f(0.5);
  const RegVarying a(0.5, 1.0);
  const LogDensityTable T(f, 0.05, 40.0);
  const std::int64_t n = 1000000;
  const double aper = lemma22_sum(a, 1, 1, {0.0, 1.0}, g_const(1.0), T, n).value;
  const double per = lemma22_sum(a, 2, 1, {0.0, 2.0}, g_const(1.0), T, n).value;
  EXPECT_NEAR(per / (2.0 * aper), 1.0, 0.03);
}

TEST(Lemma22, ResultIsIndependentOfWorkerCount) {
  const StableFamily f(0.7);
  const RegVarying a(0.7, 1.0);
  const LogDensityTable T(f, 0.05, 40.0);
  setenv("LAB_THREADS", "1", 1);
  const double one = lemma22_sum(a, 1, 1, {0.0, 1.0}, g_exp_decay(), T, 100000).value;
  setenv("LAB_THREADS", "3", 1);
  const double three = lemma22_sum(a, 1, 1, {0.0, 1.0}, g_exp_decay(), T, 100000).value;
  unsetenv("LAB_THREADS");
  EXPECT_NEAR(one, three, 1e-12);
}

TEST(Equidistribution, WeylRotation) {
  const std::size_t nu = 100000;
  std::vector<double> w(nu, 1.0 / nu);
  const auto r = equidist_average(w, std::sqrt(2.0), 1.0, 0.0, 0.5, 0.0);
  EXPECT_NEAR(r.value, 0.5, 0.005);
  EXPECT_NEAR(r.companion, 0.5, 1e-12);
}

TEST(Equidistribution, FullAndEmptySets) {
  std::vector<double> w{0.5, 0.25, 0.125};
  EXPECT_DOUBLE_EQ(equidist_average(w, 0.3, 2.0, 0.0, 2.0, 0.1).value, 0.875);
  EXPECT_DOUBLE_EQ(equidist_average(w, 0.3, 2.0, 0.7, 0.7, 0.1).value, 0.0);
}
