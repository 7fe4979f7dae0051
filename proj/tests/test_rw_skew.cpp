#include <cmath>
#include <filesystem>
#include <vector>

#include <gtest/gtest.h>

#include "tiedown/core/io.hpp"
#include "tiedown/rw_skew.hpp"

using namespace tiedown;

namespace {

// P(L_n = l | S_n = 0) by enumerating all 3^n paths
std::vector<double> brute_force_bridge(const WalkLaw& law, int n) {
  std::vector<double> acc(n + 1, 0.0);
  double z = 0.0;
  long total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (long code = 0; code < total; ++code) {
    long c = code;
    int s = 0;
    int l = 0;
    double p = 1.0;
    for (int i = 0; i < n; ++i) {
      const int d = static_cast<int>(c % 3) - 1;
      c /= 3;
      s += d;
      p *= d == 0 ? law.p_stay : law.p_side;
      if (s == 0) ++l;
    }
    if (s == 0) {
      acc[l] += p;
      z += p;
    }
  }
  for (double& v : acc) v /= z;
  return acc;
}

double binomial_return(int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r *= (k + i) / (4.0 * i);
  return r;
}

}  // namespace

TEST(WalkLaw, Validation) {
  EXPECT_TRUE(WalkLaw::lazy().is_lazy());
  EXPECT_THROW(WalkLaw(0.3, 0.3), InvalidLaw);
  EXPECT_THROW(WalkLaw(0.5, 0.0), InvalidLaw);
  EXPECT_DOUBLE_EQ(WalkLaw(0.1, 0.8).variance(), 0.2);
}

TEST(BridgeExact, SingleStep) {
  const auto pmf = bridge_local_time_exact(WalkLaw::lazy(), 1);
  ASSERT_EQ(pmf.size(), 2u);
  EXPECT_EQ(pmf[0], 0.0);
  EXPECT_DOUBLE_EQ(pmf[1], 1.0);
}

TEST(BridgeExact, MatchesEnumeration) {
  for (const WalkLaw& law : {WalkLaw::lazy(), WalkLaw(0.1, 0.8), WalkLaw(0.4, 0.2)})
    for (int n = 1; n <= 8; ++n) {
      const auto dp = bridge_local_time_exact(law, n);
      const auto bf = brute_force_bridge(law, n);
      for (int l = 0; l <= n; ++l) ASSERT_NEAR(dp[l], bf[l], 1e-14) << "n=" << n << " l=" << l;
    }
}

TEST(BridgeExact, Fixtures) {
  const std::filesystem::path dir = TIEDOWN_FIXTURE_DIR;
  for (int n : {2, 4}) {
    const CsvTable t = read_csv(dir / ("bridge_n" + std::to_string(n) + ".csv"));
    const auto dp = bridge_local_time_exact(WalkLaw::lazy(), n);
    ASSERT_EQ(t.rows.size(), dp.size());
    for (const auto& row : t.rows) EXPECT_NEAR(dp[static_cast<std::size_t>(row[0])], row[1], 1e-15) << "n=" << n;
  }
}

TEST(BridgeTable, FullTableConservesMass) {
  const BridgeTable t(WalkLaw::lazy(), 300);
  EXPECT_NEAR(t.total_mass(), 1.0, 1e-12);
  EXPECT_NEAR(t.position_mass(5), t.position_mass(-5), 0.0);
  const BridgeTable b(WalkLaw::lazy(), 300, true);
  EXPECT_NEAR(b.position_mass(0), t.position_mass(0), 1e-15);
  EXPECT_THROW(BridgeTable(WalkLaw::lazy(), kBridgeMaxN + 1), ResourceError);
}

TEST(ReturnProbabilities, LazyWalkIsCentralBinomial) {
  const auto a = return_probabilities(WalkLaw::lazy(), 500);
  // P(S_k = 0) for the (¼,½,¼) walk equals C(2k,k)/4^k
  for (int k = 1; k <= 500; ++k) ASSERT_NEAR(a[k] / binomial_return(k), 1.0, 1e-12) << k;
  const BridgeTable t(WalkLaw(0.1, 0.8), 60);
  const auto b = return_probabilities(WalkLaw(0.1, 0.8), 60);
  EXPECT_NEAR(b[60], t.position_mass(0), 1e-14);
}

TEST(BridgeMoments, DomainAndSizeBias) {
  const WalkLaw law = WalkLaw::lazy();
  EXPECT_EQ(bridge_local_time_moments(law, 100, 0), 1.0);
  EXPECT_THROW(bridge_local_time_moments(law, 100, 4), DomainError);
  EXPECT_THROW(bridge_local_time_moments(law, 2001, 1), ResourceError);
  const double ratio = bridge_size_bias_ratio(law, 2000);
  EXPECT_NEAR(ratio / (M_PI / 2.0), 1.0, 0.05);
  const double m2 = bridge_local_time_moments(law, 2000, 2);
  EXPECT_NEAR(m2 / M_PI, 1.0, 0.08);
}

TEST(BridgeMc, ArgumentChecks) {
  EXPECT_THROW(bridge_local_time_mc(WalkLaw::lazy(), 100, 9999, 1), DomainError);
  try {
    bridge_local_time_mc(WalkLaw::lazy(), 5000, 10000, 1);
    FAIL() << "expected EfficiencyError";
  } catch (const EfficiencyError& e) {
    EXPECT_GT(e.suggested_trials(), 10000u);
  }
}

TEST(BridgeMc, ReproducibleAndCloseToExact) {
  const WalkLaw law = WalkLaw::lazy();
  const BridgeMc a = bridge_local_time_mc(law, 200, 200000, 17);
  const BridgeMc b = bridge_local_time_mc(law, 200, 200000, 17);
  EXPECT_EQ(a.pmf, b.pmf);
  EXPECT_EQ(a.accepted, b.accepted);
  const auto exact = bridge_local_time_exact(law, 200);
  const double tv = total_variation(a.pmf, exact);
  EXPECT_LE(tv, 5.0 * tv_standard_error(exact, a.accepted));
  EXPECT_NEAR(a.acceptance_rate, return_probabilities(law, 200)[200], 4.0 * std::sqrt(0.04 / 200000.0));
}

TEST(BridgeMc, AcceptanceDecaysLikeInverseRoot) {
  const AcceptanceTrend t = acceptance_rate_trend(WalkLaw::lazy(), {100, 400, 1600}, 200000, 3);
  EXPECT_NEAR(t.slope, -0.5, 0.05);
}

TEST(WalkDarlingKac, HalfNormal) {
  const WalkDarlingKac d = walk_darling_kac(WalkLaw::lazy(), 10000, 10000, 8);
  EXPECT_LE(d.ks_distance, 0.05);
  EXPECT_NEAR(d.mean, 1.0, 0.03);
}
