#include <gtest/gtest.h>

#include <cmath>

#include "blowup/scales.hpp"

using namespace blowup;

namespace {
// 50-digit evaluations of the direct (cosh / arccosh) definitions.
constexpr double kAlphaStar = 0.15470053837925152901829756100391491129520350254025;
constexpr double kLambda = 0.17863279495408180431503577232941842203812983079308;
constexpr double kLogLambda1 = -0.61909409088982313896453596959206829459247219499450;
constexpr double kKbar2At01 = 0.044066458632490419572114038529438706379033170411542;
constexpr double kKbar2At025 = 0.10393337651473163120250926118093588190757759958641;
constexpr double kDesk[] = {0.0, 0.22349603576115445897270626851446936450800790983070,
                            0.80530079139505711696087664550338895318524797742830,
                            0.99758741365905281362620360463593866140766269235254};
constexpr double kLogM[] = {0.95403901301745050423702901227593604064575515064283,
                            3.0334805546972864324887253766504657448722555537236,
                            8.2320844088968762531179662875867900054385065614255};
constexpr double kT2Small = -0.60777463480051230037591723699265345993032302512760;
constexpr double kScheduleOnlyLog[] = {0.0,
                                       -1.8847161117246894383923250236268691374350773981305,
                                       -41.033029265475024318933246931469507080237958413605,
                                       -453.19619861921150317061939826110319954516407283350,
                                       -4595.5468246968191106618302574011306142032322929269,
                                       -46039.775917874884745558383281529504385960417294529,
                                       -460502.79007214793861423328090104883716532834167248};
}  // namespace

TEST(Scales, GrowthExponent) {
  EXPECT_EQ(growth_exponent(0, 0.6), 1.0);
  EXPECT_NEAR(growth_exponent(2, 0.6), 6.25, 1e-13);
  EXPECT_NEAR(growth_exponent(3, 0.5), 8.0, 1e-15);
  EXPECT_THROW(growth_exponent(-1, 0.6), ParamError);
}

TEST(Scales, ParameterIdentities) {
  const ConstructionParams p = ConstructionParams::desk();
  EXPECT_NEAR(p.alpha_star, kAlphaStar, 1e-15);
  EXPECT_NEAR(p.Lambda, kLambda, 1e-15);
  EXPECT_NEAR(1.0 - p.Lambda - p.k_max, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(-1.0 + 2.0 * p.Lambda + 3.0 * p.k_max, -p.Lambda, 1e-12);
}

TEST(Scales, ParamValidation) {
  EXPECT_THROW(ConstructionParams::make(4, 1.5, 0.4, 0.02, 0.1, 0, 3), ParamError);
  EXPECT_THROW(ConstructionParams::make(4, 0.4, 0.4, 0.02, 0.1, 0, 3), ParamError);
  EXPECT_THROW(ConstructionParams::make(2, 0.6, 0.4, 0.02, 0.1, 0, 3), ParamError);
  EXPECT_THROW(ConstructionParams::make(4, 0.6, 0.4, 0.02, 0.2, 0, 3), ParamError);
  EXPECT_THROW(ConstructionParams::make(4, 0.6, 0.4, 0.02, 0.1, -1, 3), ParamError);
  EXPECT_THROW(ConstructionParams::make(4, 0.6, 0.4, 0.02, 0.1, 0, 0), ParamError);
}

TEST(Scales, LambdaDecaysAndVanishesForLargeC) {
  const ConstructionParams p = ConstructionParams::desk();
  EXPECT_NEAR(lambda_n(p, 1).log_mag, kLogLambda1, 1e-13);
  for (int n = 1; n < 8; ++n) EXPECT_LT(lambda_n(p, n + 1).log_mag, lambda_n(p, n).log_mag);
  double prev = 1.0;
  for (double C : {1e2, 1e4, 1e8, 1e16}) {
    const ConstructionParams q = ConstructionParams::make(C, 0.6, 0.4, 0.02, 0.1, 0, 3);
    EXPECT_LT(lambda_n(q, 2).to_double(), prev);
    prev = lambda_n(q, 2).to_double();
  }
  EXPECT_LT(prev, 1e-15);
}

TEST(Scales, KbarShape) {
  const ConstructionParams p = ConstructionParams::desk();
  for (int n = 1; n <= 5; ++n) {
    EXPECT_NEAR(kbar_n(p, n, 0.0), 0.0, 1e-10);
    EXPECT_NEAR(kbar_n(p, n, 1.0), 0.0, 1e-10);
    EXPECT_NEAR(kbar_n(p, n, 0.5), p.k_max, 1e-10);
    for (double th : {0.1, 0.27, 0.4}) EXPECT_DOUBLE_EQ(kbar_n(p, n, th), kbar_n(p, n, 1.0 - th));
  }
  EXPECT_NEAR(kbar_n(p, 2, 0.1), kKbar2At01, 1e-14);
  EXPECT_NEAR(kbar_n(p, 2, 0.25), kKbar2At025, 1e-14);
}

TEST(Scales, KbarMonotoneInN) {
  const ConstructionParams p = ConstructionParams::desk();
  for (int n = 1; n < 6; ++n)
    for (int i = 0; i <= 1000; ++i)
      EXPECT_LE(kbar_n(p, n + 1, i / 1000.0), kbar_n(p, n, i / 1000.0) + 1e-15);
}

TEST(Scales, KbarDeviationBound) {
  const ConstructionParams p = ConstructionParams::desk();
  const DeviationBound b0 = kbar_deviation_bound(p, 1, 0.0);
  EXPECT_GE(b0.pointwise, 0.0);
  for (int n = 1; n <= 6; ++n) {
    for (int i = 0; i <= 1000; ++i) {
      const double th = i / 1000.0;
      const double tent = p.k_max * (1.0 - std::fabs(1.0 - 2.0 * th));
      // the bound is attained as n grows; kbar_n rounds at the scale of k_max
      EXPECT_LE(std::fabs(kbar_n(p, n, th) - tent), kbar_deviation_bound(p, n, th).pointwise + 1e-14);
    }
    EXPECT_LT(kbar_deviation_bound(p, n + 1, 0.3).uniform, kbar_deviation_bound(p, n, 0.3).uniform);
  }
  // oracle pair at n = 2, that = 1/4: deviation 0.026583, bound 0.070210
  const double tent = p.k_max * 0.5;
  EXPECT_NEAR(std::fabs(kbar_n(p, 2, 0.25) - tent), 0.026583107325105866, 1e-14);
  EXPECT_NEAR(kbar_deviation_bound(p, 2, 0.25).pointwise, 0.070209653636735274, 1e-14);
}

TEST(Scales, ArccoshByLog) {
  for (double L : {0.0, 0.1, 1.0, 5.0, 40.0, 700.0, 1e5}) {
    const double ach = arccosh_of_exp(L);
    EXPECT_LE(ach, std::log(2.0) + L + 1e-12);
    if (L < 700) {
      EXPECT_NEAR(ach, std::acosh(std::exp(L)), 1e-12 * std::max(1.0, ach));
    }
  }
}

TEST(Scales, DeskScheduleMatchesOracle) {
  const ConstructionParams p = ConstructionParams::desk();
  const std::vector<double> t = schedule(p);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[0], 0.0);
  for (int n = 0; n < 4; ++n) EXPECT_NEAR(t[n], kDesk[n], 1e-14);
  for (int n = 2; n <= 4; ++n) EXPECT_NEAR(time_scale_direct(p, n), time_scale(p, n), 1e-12);
}

TEST(Scales, MnAndEndpoint) {
  const ConstructionParams p = ConstructionParams::desk();
  for (int n = 1; n <= 3; ++n) EXPECT_NEAR(m_n(p, n).log_mag, kLogM[n - 1], 1e-13);
  for (int n = 1; n < 6; ++n) EXPECT_GT(m_n(p, n + 1).log_mag, m_n(p, n).log_mag);
  const auto ab = ab_endpoint(p, 2);
  EXPECT_NEAR(ab.first.log_mag, 6.25 * std::log(4.0), 1e-13);
  // delta -> 0: M_n -> Y
  const ConstructionParams tiny = ConstructionParams::make(4, 0.6, 1e-12, 0.02, 0.1, 0, 3);
  EXPECT_NEAR(m_n(tiny, 3).log_mag, tiny.log_Y, 1e-9);
}

TEST(Scales, SmallDeltaIsDegenerate) {
  const ConstructionParams p = ConstructionParams::make(4, 0.6, 0.05, 0.02, 0.1, 0, 3);
  // both routes agree on t_2, which lies below t_1 = 0
  EXPECT_NEAR(time_scale_direct(p, 2), kT2Small, 1e-12);
  EXPECT_NEAR(0.0 - std::expm1(log_one_minus_t(p, 2)), kT2Small, 1e-12);
  EXPECT_THROW(time_scale(p, 2), ScheduleError);
  EXPECT_THROW(schedule(p), ScheduleError);
}

TEST(Scales, ProofRegimeScheduleInLogDomain) {
  const ConstructionParams p = ConstructionParams::make(1e4, 0.9, 0.05, 0.02, 0.1, 0, 6);
  const std::vector<double> l = log_schedule(p);
  ASSERT_EQ(l.size(), 7u);
  for (int n = 0; n < 7; ++n) EXPECT_NEAR(l[n], kScheduleOnlyLog[n], 1e-12 * std::max(1.0, std::fabs(l[n])));
  for (int n = 1; n < 7; ++n) EXPECT_LT(l[n], l[n - 1]);
  // t_n rounds to 1 in double precision from n = 3 on
  EXPECT_THROW(schedule(p), ScheduleError);
}

TEST(Scales, LogScaledArithmetic) {
  const LogScaled a = LogScaled::from_double(3.0), b = LogScaled::from_double(-2.0);
  EXPECT_NEAR((a * b).to_double(), -6.0, 1e-14);
  EXPECT_NEAR((a / b).to_double(), -1.5, 1e-14);
  EXPECT_NEAR((a + b).to_double(), 1.0, 1e-14);
  EXPECT_NEAR((a - b).to_double(), 5.0, 1e-14);
  EXPECT_TRUE(LogScaled::from_double(0.0).is_zero());
  const LogScaled huge = LogScaled::from_log(1e6);
  EXPECT_NEAR((huge / huge).to_double(), 1.0, 1e-14);
  EXPECT_THROW(huge.to_double(), OverflowError);
}
