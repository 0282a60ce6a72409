#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ranklaw/ingest.hpp"
#include "ranklaw/rank.hpp"

namespace ranklaw::corr {

/// Exact pair classification over all n(n-1)/2 pairs. The five classes are
/// disjoint: p + q + ties_x + ties_y + ties_xy = n(n-1)/2.
struct KendallCounts {
  std::int64_t n = 0;
  std::int64_t p = 0;        // concordant
  std::int64_t q = 0;        // discordant
  std::int64_t ties_x = 0;   // tied in x only
  std::int64_t ties_y = 0;   // tied in y only
  std::int64_t ties_xy = 0;  // tied in both

  std::int64_t total_pairs() const { return n * (n - 1) / 2; }
  friend bool operator==(const KendallCounts&, const KendallCounts&) = default;
};

/// O(n log n): sort by (x, y), then count inversions of y by merge sort.
KendallCounts kendall_counts(std::span<const double> x, std::span<const double> y);
KendallCounts kendall_counts(const rank::RankPairs& pairs);

/// O(n^2) enumeration of every pair. Reference for the fast counter.
KendallCounts kendall_counts_bruteforce(std::span<const double> x, std::span<const double> y);

struct Tau {
  double tau_a;  // (p - q) / (p + q)
  double tau_b;  // (p - q) / sqrt((n0 - n1)(n0 - n2))
};

Tau kendall_tau(const KendallCounts& counts);
/// tau_a from bare counts.
double kendall_tau(std::int64_t p, std::int64_t q);

struct ZScore {
  double sigma_tau;
  double z;
};

/// Normal approximation under independence, no continuity correction.
ZScore z_score(double tau, std::int64_t n);

double spearman_rho(const rank::RankPairs& pairs);
double pearson_pi(std::span<const double> x, std::span<const double> y);

struct CorrelationReport {
  std::string x_label, y_label;
  KendallCounts counts;
  double tau_a = 0, tau_b = 0;
  double sigma_tau = 0, z = 0;
  double rho = 0;
  double pi = 0;
};

/// Full report for two rankings of the same entities; Pearson uses the
/// ranked values.
CorrelationReport correlate(const rank::RankedSeries& x, const rank::RankedSeries& y);

/// Year-pair Kendall matrix over panel columns (years, optionally followed by
/// the window average). Cell (i, j) compares column i with column j.
struct PairwiseMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<KendallCounts>> counts;
  std::vector<std::vector<double>> tau;  // tau_a; diagonal is 1
  std::vector<std::vector<double>> z;

  /// Square table, p above the diagonal, q below, '-' on it.
  std::string pq_table(char delim = ',') const;
  /// Square table, tau above the diagonal, Z below, '-' on it.
  std::string tau_z_table(char delim = ',') const;
};

PairwiseMatrix pairwise_matrix(const ingest::Panel& panel, const std::vector<int>& window, bool include_average = true,
                               rank::TieBreak rule = rank::TieBreak::lexical_name);

nlohmann::json to_json(const KendallCounts& c);
nlohmann::json to_json(const CorrelationReport& r);
nlohmann::json to_json(const PairwiseMatrix& m);
std::string to_text(const CorrelationReport& r);

/// Difference between a computed value and a user-supplied expected one.
struct Mismatch {
  std::string field;
  double expected;
  double actual;
  double tolerance;
};

/// Compares against {"tau": .., "rho": .., "pi": .., "p": .., "q": ..}; any
/// key may be absent. Counts must match exactly, coefficients within tol.
std::vector<Mismatch> compare_expected(const CorrelationReport& r, const nlohmann::json& expected, double tol = 5e-3);
/// Compares against square tables laid out like pq_table and tau_z_table:
/// {"pq": [[..]], "tau_z": [[..]]}. Null cells and the diagonal are skipped.
std::vector<Mismatch> compare_expected(const PairwiseMatrix& m, const nlohmann::json& expected, double tol = 5e-3);

}  // namespace ranklaw::corr
