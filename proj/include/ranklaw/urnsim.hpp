#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "ranklaw/error.hpp"
#include "ranklaw/fit.hpp"
#include "ranklaw/rank.hpp"

namespace ranklaw::urnsim {

// ---------------------------------------------------------------------------
// Special functions

/// ln Γ(x) for x > 0.
double log_gamma(double x);

/// Euler Beta B(x, y) = Γ(x)Γ(y)/Γ(x+y), evaluated through log_gamma.
double beta_fn(double x, double y);

/// B_eps(a, b) = ∫_0^eps t^a (1 - t)^b dt for a, b >= 0. Note the exponents
/// are a and b, so incomplete_beta(a, b, 1) == beta_fn(a + 1, b + 1).
double incomplete_beta(double a, double b, double eps);

/// Long-time fraction of urns holding k balls,
///   P(k) = B(k + a, b) / B(k0 + a, b - 1),  k >= k0,
/// and 0 for k < k0. Needs b > 1 and k0 + a > 0.
double yule_simon_pmf(std::int64_t k, double a, double b, std::int64_t k0);

/// P(K > k_max), exact: B(k_max + 1 + a, b - 1) / B(k0 + a, b - 1).
double yule_simon_tail(std::int64_t k_max, double a, double b, std::int64_t k0);

/// Classic one-parameter Yule-Simon f(k; rho) = rho B(k, rho + 1), k >= 1.
/// Equals yule_simon_pmf(k, 0, rho + 1, 1).
double yule_simon_classic(std::int64_t k, double rho);

// ---------------------------------------------------------------------------
// Random stream

/// Reproducible stream: std::mt19937_64 seeded through std::seed_seq from
/// (seed, substream). Both are fully specified by the C++ standard, and the
/// uniform/normal draws below avoid the implementation-defined std
/// distributions, so output is identical across platforms.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t substream = 0);

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Box-Muller, one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Urn process

struct UrnConfig {
  std::int64_t n_urns = 1;
  std::int64_t total_balls = 0;
  double a = 0.0;        // attachment offset, weight = k + a
  std::int64_t k0 = 1;   // initial balls per urn
  std::optional<std::int64_t> capacity;
  std::uint64_t seed = 0;
  bool trace = false;

  void validate() const;
};

struct UrnOutcome {
  std::vector<std::int64_t> occupancy;
  std::vector<std::int32_t> choices;  // urn index per ball when traced
  std::int64_t placed = 0;
};

/// Thrown when every urn reaches capacity before all balls are placed.
class CapacityExhausted : public Error {
 public:
  CapacityExhausted(std::int64_t placed, UrnOutcome partial);
  std::int64_t placed() const { return placed_; }
  const UrnOutcome& partial() const { return partial_; }

 private:
  std::int64_t placed_;
  UrnOutcome partial_;
};

/// Sequential preferential attachment: each ball goes to urn i with
/// probability (k_i + a) / Σ_j (k_j + a) over urns below capacity.
/// `substream` selects an independent stream for replicate runs.
UrnOutcome simulate_urns(const UrnConfig& config, std::uint64_t substream = 0);

struct ReplicateSummary {
  std::vector<double> mean;    // per sorted (descending) position
  std::vector<double> stddev;  // sample, n - 1
  std::vector<std::vector<std::int64_t>> sorted_occupancy;
};

/// Replicate r runs on substream r; occupancies are sorted descending.
ReplicateSummary simulate_replicates(const UrnConfig& config, int replicates);

std::string occupancy_csv(const UrnOutcome& outcome);
nlohmann::json to_json(const UrnConfig& config);
nlohmann::json to_json(const ReplicateSummary& summary);

/// Occupancies as a ranked series (urn ids "urn<i>").
rank::RankedSeries occupancy_series(const std::vector<std::int64_t>& occupancy);

// ---------------------------------------------------------------------------
// Synthetic rank-size data

/// y(r) on r = 1..N times exp(sigma Z), re-sorted descending and re-ranked.
/// Entity ids are "r<original rank>", zero-padded to a common width.
rank::RankedSeries generate_ranksize(const fit::RankSizeModel& model, double sigma, std::uint64_t seed);

}  // namespace ranklaw::urnsim
