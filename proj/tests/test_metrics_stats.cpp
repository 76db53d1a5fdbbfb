#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "projlab/metrics.hpp"
#include "projlab/rng.hpp"
#include "projlab/stats.hpp"
#include "oracles.hpp"

using namespace projlab;

using oracle::brute_norms;
using oracle::simpson_f_cdf;

TEST(Norms, IdenticalImagesAreZero) {
  Image a(5, 5, 0.3f);
  EXPECT_EQ(norms(a, a), (NormTriple{0.0, 0, 0.0}));
}

TEST(Norms, SinglePixelHandComputed) {
  Image a(2, 2, 0.0f), b(2, 2, 0.0f);
  b.at(1, 0, 0) = 3.0f / 255.0f;
  b.at(1, 0, 2) = 4.0f / 255.0f;
  const NormTriple n = norms(a, b);
  EXPECT_DOUBLE_EQ(n.l2, 5.0);
  EXPECT_EQ(n.linf, 4);
  EXPECT_DOUBLE_EQ(n.l0_pct, 25.0);
}

TEST(Norms, MatchesBruteForceOnRandomPairs) {
  RngStream rng(77, 1);
  for (int t = 0; t < 200; ++t) {
    const int w = 1 + static_cast<int>(rng.below(8)), h = 1 + static_cast<int>(rng.below(8));
    Image a(w, h), b(w, h);
    for (float& v : a.data()) v = static_cast<float>(rng.uniform());
    for (float& v : b.data()) v = rng.uniform() < 0.5 ? static_cast<float>(rng.uniform()) : 0.0f;
    const NormTriple got = norms(a, b), want = brute_norms(a, b);
    ASSERT_NEAR(got.l2, want.l2, 1e-9);
    ASSERT_EQ(got.linf, want.linf);
    ASSERT_DOUBLE_EQ(got.l0_pct, want.l0_pct);
  }
}

TEST(Norms, SizeMismatchThrows) { EXPECT_THROW(norms(Image(2, 2), Image(3, 2)), Error); }

TEST(Reduction, ClampedPercent) {
  EXPECT_DOUBLE_EQ(reduction_pct(0.8, 0.2), 75.0);
  EXPECT_DOUBLE_EQ(reduction_pct(0.5, 0.9), 0.0);
  EXPECT_THROW(reduction_pct(0.0, 0.1), Error);
}

TEST(Anova, ShiftedTriplesGiveFThree) {
  const AnovaResult r = anova_oneway({{1, 2, 3}, {2, 3, 4}, {3, 4, 5}});
  EXPECT_NEAR(r.ss_between, 6.0, 1e-12);
  EXPECT_NEAR(r.ss_within, 6.0, 1e-12);
  EXPECT_EQ(r.dof_between, 2);
  EXPECT_EQ(r.dof_within, 6);
  EXPECT_NEAR(r.f_stat, 3.0, 1e-12);
  // For d1 = 2 the tail has a closed form: (1 + 2F/d2)^(-d2/2) = 2^-3.
  EXPECT_NEAR(r.p_value, 0.125, 1e-12);
}

TEST(Anova, HandComputedSumsOfSquares) {
  RngStream rng(5, 0);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::vector<double>> g(2 + rng.below(3));
    for (auto& grp : g) {
      grp.resize(2 + rng.below(5));
      for (double& v : grp) v = std::round(rng.uniform(0, 20));
    }
    const oracle::SumsOfSquares hand = oracle::hand_anova(g);
    const AnovaResult r = anova_oneway(g);
    ASSERT_NEAR(r.ss_between, hand.between, 1e-9);
    ASSERT_NEAR(r.ss_within, hand.within, 1e-9);
    if (hand.within > 0) ASSERT_NEAR(r.f_stat, hand.f(), 1e-9);
  }
}

TEST(Anova, IdenticalObservationsAreDegenerate) {
  const AnovaResult r = anova_oneway({{2, 2}, {2, 2}});
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.f_stat, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(Anova, TooFewObservationsThrows) {
  EXPECT_THROW(anova_oneway({{1, 2, 3}}), Error);
  EXPECT_THROW(anova_oneway({{1}, {2, 3}}), Error);
}

TEST(FDistribution, MatchesSimpsonOracle) {
  for (double d1 : {1.0, 2.0, 3.0, 5.0, 10.0})
    for (double d2 : {2.0, 4.0, 6.0, 20.0, 78.0})
      for (double f : {0.1, 0.5, 1.0, 2.0, 3.0, 7.5}) {
        SCOPED_TRACE(testing::Message() << "F=" << f << " d1=" << d1 << " d2=" << d2);
        ASSERT_NEAR(f_cdf(f, d1, d2), simpson_f_cdf(f, d1, d2), 1e-6);
        ASSERT_NEAR(f_sf(f, d1, d2) + f_cdf(f, d1, d2), 1.0, 1e-12);
      }
}

TEST(Quantiles, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
  const BoxStats b = box_stats({1, 2, 3, 4, 5});
  EXPECT_DOUBLE_EQ(b.q1, 2.0);
  EXPECT_DOUBLE_EQ(b.q3, 4.0);
  EXPECT_EQ(b.n, 5u);
}
