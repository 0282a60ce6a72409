#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ranklaw/corr.hpp"
#include "ranklaw/error.hpp"

using namespace ranklaw;
using namespace ranklaw::corr;

namespace {

rank::RankedSeries series(const std::map<std::string, double>& v) { return rank::rank_desc(v); }

// Spearman via the classic d^2 formula, valid without ties.
double spearman_d2(const std::vector<double>& rx, const std::vector<double>& ry) {
  const double n = static_cast<double>(rx.size());
  double d2 = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  return 1 - 6 * d2 / (n * (n * n - 1));
}

}  // namespace

TEST(Corr, FastCountsEqualBruteForceOnPermutations) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 199);
    std::vector<double> x(n), y(n);
    std::iota(x.begin(), x.end(), 1.0);
    std::iota(y.begin(), y.end(), 1.0);
    std::shuffle(y.begin(), y.end(), gen);
    ASSERT_EQ(kendall_counts(x, y), kendall_counts_bruteforce(x, y)) << "n=" << n;
  }
}

TEST(Corr, FastCountsEqualBruteForceWithTies) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 150);
    const int levels = 1 + static_cast<int>(gen() % 6);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = static_cast<double>(gen() % levels);
      y[i] = static_cast<double>(gen() % (levels + 1));
    }
    const auto fast = kendall_counts(x, y);
    ASSERT_EQ(fast, kendall_counts_bruteforce(x, y));
    EXPECT_EQ(fast.p + fast.q + fast.ties_x + fast.ties_y + fast.ties_xy, fast.total_pairs());
  }
}

TEST(Corr, CountsOnSmallExample) {
  const std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 4};
  const auto c = kendall_counts(x, y);
  EXPECT_EQ(c.p, 5);
  EXPECT_EQ(c.q, 1);
  EXPECT_NEAR(kendall_tau(c).tau_a, 4.0 / 6.0, 1e-15);
}

TEST(Corr, TauFromRegionPairCounts) {
  EXPECT_NEAR(kendall_tau(169, 21), 148.0 / 190.0, 1e-15);
  EXPECT_NEAR(kendall_tau(169, 21), 0.779, 5e-4);
  EXPECT_THROW(kendall_tau(0, 0), NumericError);
}

TEST(Corr, TauBWithTies) {
  // x has one tied pair; tau_b = (p - q) / sqrt((n0 - n1)(n0 - n2)).
  const std::vector<double> x{1, 1, 2, 3}, y{1, 2, 3, 4};
  const auto c = kendall_counts(x, y);
  EXPECT_EQ(c.p, 5);
  EXPECT_EQ(c.ties_x, 1);
  const auto t = kendall_tau(c);
  EXPECT_NEAR(t.tau_a, 1.0, 1e-15);
  EXPECT_NEAR(t.tau_b, 5.0 / std::sqrt(5.0 * 6.0), 1e-15);
}

TEST(Corr, ZScoreReference) {
  const auto z = z_score(0.9747, 8092);
  EXPECT_NEAR(z.sigma_tau, 0.00741, 1e-5);
  EXPECT_NEAR(z.z, 131.49, 0.05);
  EXPECT_NEAR(z_score(0.849, 8092).z, 114.5, 0.5);
  EXPECT_NEAR(z.sigma_tau, std::sqrt(2.0 * (2 * 8092 + 5) / (9.0 * 8092 * 8091)), 1e-15);
  EXPECT_THROW(z_score(0.5, 2), InvalidArgument);
}

TEST(Corr, SpearmanMatchesPearsonOnRanksAndD2) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(gen() % 100);
    std::map<std::string, double> a, b;
    for (int i = 0; i < n; ++i) {
      a["e" + std::to_string(i)] = std::uniform_real_distribution<double>(0, 1)(gen);
      b["e" + std::to_string(i)] = std::uniform_real_distribution<double>(0, 1)(gen);
    }
    const auto pairs = rank::pair_ranks(series(a), series(b));
    const auto rx = pairs.x(), ry = pairs.y();
    EXPECT_NEAR(spearman_rho(pairs), pearson_pi(rx, ry), 1e-12);
    EXPECT_NEAR(spearman_rho(pairs), spearman_d2(rx, ry), 1e-12);
  }
}

TEST(Corr, PearsonBasics) {
  const std::vector<double> x{1, 2, 3}, y{2, 4, 6}, z{3, 2, 1}, c{1, 1, 1};
  EXPECT_NEAR(pearson_pi(x, y), 1.0, 1e-15);
  EXPECT_NEAR(pearson_pi(x, z), -1.0, 1e-15);
  EXPECT_THROW(pearson_pi(x, c), NumericError);
}

TEST(Corr, IdenticalRankingsGiveUnitCoefficients) {
  const std::map<std::string, double> v{{"a", 5}, {"b", 3}, {"c", 9}, {"d", 1}};
  const auto r = correlate(series(v), series(v));
  EXPECT_DOUBLE_EQ(r.tau_a, 1.0);
  EXPECT_DOUBLE_EQ(r.rho, 1.0);
  EXPECT_NEAR(r.pi, 1.0, 1e-15);
  EXPECT_EQ(r.counts.q, 0);
}

TEST(Corr, ReversedRankingsGiveMinusOne) {
  const std::map<std::string, double> v{{"a", 5}, {"b", 3}, {"c", 9}, {"d", 1}};
  std::map<std::string, double> w;
  for (const auto& [k, x] : v) w[k] = -x + 100;
  const auto r = correlate(series(v), series(w));
  EXPECT_DOUBLE_EQ(r.tau_a, -1.0);
  EXPECT_DOUBLE_EQ(r.rho, -1.0);
}

TEST(Corr, CompareExpectedFlagsMismatches) {
  const std::map<std::string, double> v{{"a", 5}, {"b", 3}, {"c", 9}, {"d", 1}};
  const auto r = correlate(series(v), series(v));
  EXPECT_TRUE(compare_expected(r, {{"tau", 1.0}, {"p", 6}, {"q", 0}}).empty());
  const auto mm = compare_expected(r, {{"tau", 0.99}, {"p", 5}});
  ASSERT_EQ(mm.size(), 2u);
  EXPECT_TRUE(compare_expected(r, {{"tau", 0.996}}).empty());
}

TEST(Corr, PairwiseMatrixOnPanel) {
  const auto panel = ingest::parse_panel("entity_id,2007,2008,2009\na,1,1,4\nb,2,2,3\nc,3,4,2\nd,4,3,1\n");
  const auto m = pairwise_matrix(panel, panel.years, true);
  ASSERT_EQ(m.labels, (std::vector<std::string>{"2007", "2008", "2009", "avg"}));
  EXPECT_DOUBLE_EQ(m.tau[0][0], 1.0);
  EXPECT_EQ(m.counts[0][1].p, 5);
  EXPECT_EQ(m.counts[0][1].q, 1);
  EXPECT_DOUBLE_EQ(m.tau[0][2], -1.0);
  EXPECT_DOUBLE_EQ(m.tau[0][1], m.tau[1][0]);
  EXPECT_NE(m.pq_table().find("2007"), std::string::npos);
  using nlohmann::json;
  json pq = json::array();
  for (int i = 0; i < 4; ++i) pq.push_back(json::array({nullptr, nullptr, nullptr, nullptr}));
  pq[0][1] = 5;
  pq[1][0] = 1;
  EXPECT_TRUE(compare_expected(m, {{"pq", pq}}).empty());
  pq[0][1] = 4;
  EXPECT_EQ(compare_expected(m, {{"pq", pq}}).size(), 1u);
  json tz = pq;
  tz[0][1] = m.tau[0][1] + 1e-3;
  tz[1][0] = nullptr;
  EXPECT_TRUE(compare_expected(m, {{"tau_z", tz}}).empty());
}
