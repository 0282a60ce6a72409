#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "ranklaw/error.hpp"
#include "ranklaw/stats.hpp"
#include "reference_data.hpp"

using namespace ranklaw;
using namespace ranklaw::stats;

namespace {

// Independent two-pass moments.
struct Moments {
  double mean, m2, m3, m4;
};

Moments central_moments(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  Moments m{mean, 0, 0, 0};
  for (double x : v) {
    const double d = x - mean;
    m.m2 += d * d / n;
    m.m3 += d * d * d / n;
    m.m4 += d * d * d * d / n;
  }
  return m;
}

}  // namespace

TEST(Stats, RegionCountsSummary) {
  const auto v = testdata::region_count_values();
  const auto s = describe(v);
  EXPECT_EQ(s.n, 20u);
  EXPECT_DOUBLE_EQ(s.sum, 8092);
  EXPECT_DOUBLE_EQ(s.min, 74);
  EXPECT_DOUBLE_EQ(s.max, 1544);
  EXPECT_NEAR(s.mean, 404.6, 1e-9);
  EXPECT_DOUBLE_EQ(s.median, 319);
  EXPECT_NEAR(s.std_dev, 362.253, 5e-4);
  EXPECT_NEAR(s.variance, 131227.52, 1e-2);
  EXPECT_NEAR(s.std_err, 81.0023, 5e-4);
  EXPECT_NEAR(s.rms, 536.998, 5e-3);
  EXPECT_NEAR(s.skewness, 2.1284, 5e-4);
  EXPECT_NEAR(s.kurtosis, 3.8693, 5e-4);
  EXPECT_NEAR(s.kurtosis_raw, s.kurtosis + 3, 1e-12);
  EXPECT_NEAR(s.mu_over_sigma, 1.117, 5e-4);
  EXPECT_NEAR(s.nonparam_skew, 0.7089, 5e-4);
}

TEST(Stats, ShapeMatchesIndependentMoments) {
  const std::vector<double> v{3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7};
  const auto m = central_moments(v);
  const auto s = describe(v);
  EXPECT_NEAR(s.skewness, m.m3 / std::pow(m.m2, 1.5), 1e-12);
  EXPECT_NEAR(s.kurtosis, m.m4 / (m.m2 * m.m2) - 3, 1e-12);
  EXPECT_NEAR(s.variance, m.m2 * v.size() / (v.size() - 1.0), 1e-12);
}

TEST(Stats, TwoPointSeries) {
  const std::vector<double> v{1, 3};
  const auto s = describe(v);
  EXPECT_DOUBLE_EQ(s.mean, 2);
  EXPECT_DOUBLE_EQ(s.median, 2);
  EXPECT_NEAR(s.std_dev, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s.nonparam_skew, 0.0, 1e-15);
}

TEST(Stats, ConstantSeriesHasNanShape) {
  const std::vector<double> v{5, 5, 5};
  const auto s = describe(v);
  EXPECT_DOUBLE_EQ(s.std_dev, 0);
  EXPECT_TRUE(std::isnan(s.skewness));
  EXPECT_TRUE(std::isnan(s.kurtosis));
}

TEST(Stats, DescribeNeedsTwoValues) {
  const std::vector<double> one{1};
  EXPECT_THROW(describe(one), InvalidArgument);
}

TEST(Stats, NationalFormulaChecks) {
  EXPECT_NEAR(nonparam_skew(8.9204e7, 2.4601e7, 6.7115e8), 0.2889, 1e-3);
  EXPECT_NEAR(8.9204e7 / 6.7115e8, 0.1329, 1e-4);
  EXPECT_NEAR(std_err(6.7115e8, 8092), 7.461e6, 1e3);
}

TEST(Stats, NormalQuantile) {
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_quantile(0.025), -1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-9);
  EXPECT_EQ(normal_quantile(0.0), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(normal_quantile(1.0), std::numeric_limits<double>::infinity());
  EXPECT_THROW(normal_quantile(1.5), InvalidArgument);
}

TEST(Stats, QQTwoPoints) {
  const std::vector<double> v{-1, 1};
  const auto qq = qq_normal(v);
  ASSERT_EQ(qq.size(), 2u);
  EXPECT_NEAR(qq[0].theoretical, normal_quantile(0.25), 1e-15);
  EXPECT_NEAR(qq[1].theoretical, normal_quantile(0.75), 1e-15);
  EXPECT_LT(qq[0].sample, 0);
  EXPECT_NEAR(qq[0].sample, -qq[1].sample, 1e-15);
}

TEST(Stats, QQIsMonotoneAndStandardized) {
  const auto v = testdata::region_count_values();
  const auto qq = qq_normal(v);
  double sum = 0;
  for (std::size_t i = 1; i < qq.size(); ++i) {
    EXPECT_LE(qq[i - 1].sample, qq[i].sample);
    EXPECT_LT(qq[i - 1].theoretical, qq[i].theoretical);
  }
  for (const auto& p : qq) sum += p.sample;
  EXPECT_NEAR(sum, 0.0, 1e-12);
}

TEST(Stats, QQRejectsConstantSeries) {
  const std::vector<double> v{2, 2, 2};
  EXPECT_THROW(qq_normal(v), NumericError);
}

TEST(Stats, SummaryTableHasOneRowPerStatistic) {
  const auto v = testdata::region_count_values();
  const auto t = summary_table({{"N", describe(v)}});
  EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 16);
}
