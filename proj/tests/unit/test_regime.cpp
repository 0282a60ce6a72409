#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ranklaw/error.hpp"
#include "ranklaw/regime.hpp"

using namespace ranklaw;
using namespace ranklaw::regime;

namespace {

ScatterSet two_lines(double s1, double s2, int per_line) {
  ScatterSet s;
  for (int i = 1; i <= per_line; ++i) {
    s.points.push_back({"a" + std::to_string(i), i * 1.0, s1 * i});
    s.points.push_back({"b" + std::to_string(i), i * 1.3, s2 * i * 1.3});
  }
  return s;
}

}  // namespace

TEST(Regime, InertiaAxisMatchesClosedForm) {
  ScatterSet s;
  const double xs[] = {1, 2, 3, 4, 5}, ys[] = {2.1, 3.9, 6.2, 7.8, 10.1};
  for (int i = 0; i < 5; ++i) s.points.push_back({std::to_string(i), xs[i], ys[i]});
  const auto f = inertia_axis(s);
  // Normal equations solved by hand: mean x = 3, mean y = 6.02, Sxy = 19.9, Sxx = 10.
  EXPECT_NEAR(f.slope, 1.99, 1e-12);
  EXPECT_NEAR(f.intercept, 6.02 - 1.99 * 3, 1e-12);
  EXPECT_GT(f.r_squared, 0.99);
  EXPECT_GT(f.slope_se, 0);
}

TEST(Regime, InertiaAxisErrors) {
  ScatterSet s{{{"a", 1, 1}, {"b", 2, 2}}};
  EXPECT_THROW(inertia_axis(s), InvalidArgument);
  s.points.push_back({"c", 1, 5});
  s.points[1].x = 1;
  EXPECT_THROW(inertia_axis(s), NumericError);
}

TEST(Regime, ExactRecoveryOnSeparableLines) {
  for (auto [s1, s2] : {std::pair{3.0, 0.5}, std::pair{10.0, 1.0}, std::pair{-2.0, 4.0}}) {
    const auto s = two_lines(s1, s2, 15);
    const auto split = two_line_split(s);
    EXPECT_TRUE(split.converged);
    EXPECT_FALSE(split.degenerate);
    const double hi = std::max(s1, s2), lo = std::min(s1, s2);
    ASSERT_EQ(split.slopes.size(), 2u);
    EXPECT_LT(std::fabs(split.slopes[0] - hi), 1e-9);
    EXPECT_LT(std::fabs(split.slopes[1] - lo), 1e-9);
    for (const auto& [id, c] : split.assignments) {
      const bool on_a = id[0] == 'a';
      EXPECT_EQ(c, (on_a == (s1 > s2)) ? 1 : 2) << id;
    }
    EXPECT_NEAR(split.objective, 0.0, 1e-12);
  }
}

TEST(Regime, ThreeLineRecovery) {
  ScatterSet s;
  for (int i = 1; i <= 10; ++i)
    for (double slope : {5.0, 1.0, 0.2}) s.points.push_back({std::to_string(slope) + "_" + std::to_string(i), i * 1.0, slope * i});
  SplitOptions opt;
  opt.k = 3;
  const auto split = two_line_split(s, opt);
  ASSERT_EQ(split.slopes.size(), 3u);
  EXPECT_NEAR(split.slopes[0], 5.0, 1e-9);
  EXPECT_NEAR(split.slopes[1], 1.0, 1e-9);
  EXPECT_NEAR(split.slopes[2], 0.2, 1e-9);
}

TEST(Regime, ObjectiveIsMonotone) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    ScatterSet s;
    const int n = 10 + trial % 40;
    for (int i = 0; i < n; ++i) s.points.push_back({std::to_string(i), u(gen), u(gen)});
    const auto split = two_line_split(s);
    for (std::size_t i = 1; i < split.objective_history.size(); ++i)
      EXPECT_LE(split.objective_history[i], split.objective_history[i - 1] * (1 + 1e-12) + 1e-15);
    if (!split.objective_history.empty()) EXPECT_LE(split.objective, split.objective_history.back() + 1e-12);
  }
}

TEST(Regime, CollinearInputIsDegenerate) {
  ScatterSet s;
  for (int i = 1; i <= 8; ++i) s.points.push_back({std::to_string(i), i * 1.0, 2.0 * i});
  const auto split = two_line_split(s);
  EXPECT_TRUE(split.degenerate);
  EXPECT_EQ(split.assignments.size(), 8u);
}

TEST(Regime, IdenticalPointsDoNotCrash) {
  ScatterSet s;
  for (int i = 0; i < 6; ++i) s.points.push_back({std::to_string(i), 1.0, 1.0});
  EXPECT_NO_THROW({
    const auto split = two_line_split(s);
    EXPECT_TRUE(split.degenerate);
  });
}

TEST(Regime, OutliersAreExcluded) {
  auto s = two_lines(3, 0.5, 10);
  s.points.push_back({"far", 1, 1000});
  SplitOptions opt;
  opt.outlier_ids = {"far"};
  const auto split = two_line_split(s, opt);
  EXPECT_EQ(split.outliers, std::vector<std::string>{"far"});
  EXPECT_FALSE(split.assignments.contains("far"));
  EXPECT_NEAR(split.slopes[0], 3, 1e-9);
  const auto csv = split_csv(s, split);
  EXPECT_NE(csv.find("far,1,1000,0"), std::string::npos);
}

TEST(Regime, TooFewPoints) {
  ScatterSet s{{{"a", 1, 1}, {"b", 2, 1}, {"c", 1, 3}}};
  EXPECT_THROW(two_line_split(s), InvalidArgument);
  SplitOptions opt;
  opt.k = 4;
  EXPECT_THROW(two_line_split(two_lines(1, 2, 5), opt), InvalidArgument);
}

TEST(Regime, LogLogPowerFit) {
  ScatterSet s;
  for (int i = 1; i <= 20; ++i) s.points.push_back({std::to_string(i), i * 1.0, 3.0 * std::pow(i, 0.7)});
  const auto f = loglog_power_fit(s);
  EXPECT_NEAR(f.c, 3.0, 1e-12);
  EXPECT_NEAR(f.beta, 0.7, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  s.points.push_back({"zero", 0, 1});
  EXPECT_THROW(loglog_power_fit(s), InvalidArgument);
}
