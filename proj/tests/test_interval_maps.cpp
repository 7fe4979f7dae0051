#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "tiedown/interval_maps.hpp"

using namespace tiedown;

TEST(MapStep, BranchFormulas) {
  const MapSpec T = MapSpec::T(0.5);
  EXPECT_DOUBLE_EQ(map_step(T, 0.25), 0.3125);
  for (double g : {0.3, 0.5, 0.9}) EXPECT_DOUBLE_EQ(map_step(MapSpec::T(g), 0.75), 0.5);
  EXPECT_EQ(map_step(T, 0.0), 0.0);
  EXPECT_EQ(map_step(T, 0.5), 0.0);
  EXPECT_NEAR(map_step(T, std::nextafter(0.5, 0.0)), 1.0, 1e-15);
  EXPECT_THROW(map_step(T, 1.5), DomainError);
}

TEST(MapStep, ExtendedPrecisionBelowCutoff) {
  const MapSpec T = MapSpec::T(0.5);
  const double x = 0x1.0p-31;
  // x(1 + (2x)^2) − x = 4x³ is far below one ulp of x, so compare the increment in long double
  const long double lx = x;
  EXPECT_EQ(static_cast<long double>(T.lift(x)), static_cast<long double>(static_cast<double>(lx + 4.0L * lx * lx * lx)));
  EXPECT_NEAR(T.lift_inverse(T.lift(0.3)), 0.3, 1e-15);
}

TEST(MapStep, RMapReducesModOne) {
  const MapSpec R = MapSpec::R(0.5, 3);
  const double x = 0.6;
  const double lifted = x * (1.0 + std::pow(3.0 * x, 2.0));
  EXPECT_NEAR(map_step(R, x), lifted - std::floor(lifted), 1e-15);
}

TEST(FirstReturn, Examples) {
  const MapSpec T = MapSpec::T(0.5);
  const InducedOrbit o = first_return(T, 0.75);
  EXPECT_EQ(o.phi, 1u);
  EXPECT_EQ(o.landing, 0.5);
  EXPECT_THROW(first_return(T, 0.5, 1000), NonReturnError);
  EXPECT_FALSE(try_first_return(T, 0.5, 1000).has_value());
}

TEST(FirstReturn, AgreesWithPlainIteration) {
  const MapSpec T = MapSpec::T(0.7);
  Engine rng = block_engine(3, 0);
  for (int i = 0; i < 2000; ++i) {
    const double x0 = 0.5 + 0.5 * uniform_open(rng);
    double x = map_step(T, x0);
    std::uint64_t n = 1;
    while (x < 0.5 && n < 1000000) {
      x = map_step(T, x);
      ++n;
    }
    if (n >= 1000000) continue;
    const InducedOrbit o = first_return(T, x0);
    ASSERT_EQ(o.phi, n) << x0;
    ASSERT_NEAR(o.landing, x, 1e-9) << x0;
  }
}

TEST(ReturnTail, SlopeAndSmallValues) {
  const ReturnTail tail = return_tail(MapSpec::T(0.5), 1000000, 11);
  EXPECT_NEAR(tail.slope, -0.5, 0.05);
  ASSERT_EQ(tail.small_counts.size(), 20u);
  for (std::size_t i = 0; i < tail.small_counts.size(); ++i) EXPECT_GT(tail.small_counts[i], 0u) << "phi=" << i + 1;
}

TEST(ReturnTail, RMapSlope) {
  const ReturnTail tail = return_tail(MapSpec::R(0.5, 3), 200000, 5);
  EXPECT_NEAR(tail.slope, -0.5, 0.05);
}

class UlamT : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    U = new UlamMatrix(ulam_matrix(MapSpec::T(0.5), 512));
    fixed = new Eigen::VectorXd(ulam_fixed_vector(*U));
  }
  static void TearDownTestSuite() {
    delete U;
    delete fixed;
  }
  static UlamMatrix* U;
  static Eigen::VectorXd* fixed;
};
UlamMatrix* UlamT::U = nullptr;
Eigen::VectorXd* UlamT::fixed = nullptr;

TEST_F(UlamT, RowsAreStochastic) {
  for (int i = 0; i < U->bins; ++i) ASSERT_NEAR(U->matrix.row(i).sum(), 1.0, 1e-12) << i;
  EXPECT_GE(U->matrix.minCoeff(), 0.0);
}

TEST_F(UlamT, NonReturnWarningIsAttached) {
  if (U->nonreturn_rate > 1e-6) EXPECT_FALSE(U->warning.empty());
}

TEST_F(UlamT, FixedVectorIsNonnegativeAndLeftInvariant) {
  EXPECT_GE(fixed->minCoeff(), 0.0);
  EXPECT_NEAR(fixed->sum(), 1.0, 1e-12);
  const Eigen::VectorXd image = U->matrix.transpose() * *fixed;
  EXPECT_LE((image - *fixed).lpNorm<1>(), 1e-10);
}

TEST_F(UlamT, SecondModulusBelowOne) {
  const auto m = ulam_leading_moduli(*U);
  EXPECT_NEAR(m.first, 1.0, 1e-10);
  EXPECT_LT(m.second, 1.0);
}

TEST_F(UlamT, FixedVectorSurvivesExactInducedStep) {
  EXPECT_LE(ulam_invariance_tv(MapSpec::T(0.5), *U, *fixed, 1000, 9), 1e-3);
}

TEST_F(UlamT, KacPartialMeansGrowLikeOneMinusGamma) {
  const KacTrend k = kac_partial_means(MapSpec::T(0.5), *U, *fixed, 1000000, 4);
  EXPECT_NEAR(k.exponent, 0.5, 0.05);
}

TEST(InfiniteDensity, ExponentsAndPositivity) {
  for (double g : {0.5, 0.8}) {
    const DensityProfile d = infinite_density_profile(MapSpec::T(g), 32, 10);
    EXPECT_NEAR(d.exponent, -1.0 / g, 0.1) << "gamma=" << g;
    EXPECT_LT(d.stabilization, 1e-4);
    double lo = INFINITY;
    double hi = 0.0;
    for (std::size_t i = 0; i < d.x.size(); ++i) {
      if (d.x[i] < 0.5) continue;
      lo = std::min(lo, d.h[i]);
      hi = std::max(hi, d.h[i]);
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi, INFINITY);
  }
}

TEST(DarlingKac, HalfNormalLimit) {
  const DarlingKacResult a = darling_kac_empirical(MapSpec::T(0.5), 100000, 10000, 5);
  EXPECT_LE(a.ks_distance, 0.05);
  EXPECT_NEAR(a.second_moment / (M_PI / 2.0), 1.0, 0.05);
  const DarlingKacResult b = darling_kac_empirical(MapSpec::T(0.5), 100000, 10000, 5);
  EXPECT_EQ(a.ks_distance, b.ks_distance);
  EXPECT_THROW(darling_kac_empirical(MapSpec::T(0.5), 100, 999, 5), DomainError);
}

TEST(DarlingKac, RMap) {
  const DarlingKacResult a = darling_kac_empirical(MapSpec::R(0.5, 3), 100000, 10000, 6);
  EXPECT_LE(a.ks_distance, 0.05);
}

TEST(MapTied, ZeroFunctionAndShiftInvariance) {
  const MapSpec T = MapSpec::T(0.5);
  const MapTiedReport zero = map_tied_down_estimate(T, 1000, 10000, g_const(0.0), 3);
  EXPECT_EQ(zero.deviation.back(), 0.0);
  const MapTiedReport a = map_tied_down_estimate(T, 1000, 10000, g_exp_decay(), 3);
  const MapTiedReport b = map_tied_down_estimate(T, 1000, 10000, g_exp_decay().plus_constant(0.0), 3);
  EXPECT_EQ(a.deviation, b.deviation);
  EXPECT_THROW(map_tied_down_estimate(T, 1000, 9999, g_const(1.0), 3), DomainError);
}
