#include "ranklaw/urnsim.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "ranklaw/format.hpp"

namespace ranklaw::urnsim {
namespace {

// Partial-sum tree over urn weights: O(log n) update and inverse-CDF lookup.
class FenwickTree {
 public:
  explicit FenwickTree(std::size_t n) : tree_(n + 1, 0.0), size_(n) {
    for (step_ = 1; step_ * 2 <= n; step_ *= 2) {
    }
  }

  void add(std::size_t i, double delta) {
    for (++i; i <= size_; i += i & (~i + 1)) tree_[i] += delta;
  }

  double total() const {
    double s = 0;
    for (std::size_t i = size_; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

  // Smallest index whose inclusive prefix sum exceeds target.
  std::size_t find(double target) const {
    std::size_t pos = 0;
    for (std::size_t step = step_; step > 0; step /= 2) {
      if (pos + step <= size_ && tree_[pos + step] <= target) {
        pos += step;
        target -= tree_[pos];
      }
    }
    return std::min(pos, size_ - 1);
  }

 private:
  std::vector<double> tree_;
  std::size_t size_;
  std::size_t step_ = 1;
};

InvalidArgument urn_error(const std::string& what) { return InvalidArgument("urnsim", what); }

}  // namespace

double log_gamma(double x) {
  if (!(x > 0)) throw urn_error("log_gamma needs x > 0");
  return std::lgamma(x);
}

double beta_fn(double x, double y) {
  if (!(x > 0) || !(y > 0)) throw urn_error("beta_fn needs positive arguments");
  return std::exp(log_gamma(x) + log_gamma(y) - log_gamma(x + y));
}

double incomplete_beta(double a, double b, double eps) {
  if (!(a >= 0) || !(b >= 0)) throw urn_error("incomplete_beta needs a, b >= 0");
  if (!(eps >= 0 && eps <= 1)) throw urn_error("incomplete_beta needs eps in [0, 1]");
  if (eps == 0) return 0.0;
  // Boost's non-normalized form integrates t^(a'-1) (1-t)^(b'-1).
  return boost::math::beta(a + 1.0, b + 1.0, eps);
}

double yule_simon_pmf(std::int64_t k, double a, double b, std::int64_t k0) {
  if (!(b > 1)) throw urn_error("yule_simon_pmf needs b > 1 for a normalizable distribution");
  if (k0 < 0 || !(static_cast<double>(k0) + a > 0)) throw urn_error("yule_simon_pmf needs k0 >= 0 and k0 + a > 0");
  if (k < k0) return 0.0;
  const double x = static_cast<double>(k) + a;
  const double x0 = static_cast<double>(k0) + a;
  return std::exp(log_gamma(x) + log_gamma(b) - log_gamma(x + b) -
                  (log_gamma(x0) + log_gamma(b - 1.0) - log_gamma(x0 + b - 1.0)));
}

double yule_simon_tail(std::int64_t k_max, double a, double b, std::int64_t k0) {
  if (!(b > 1)) throw urn_error("yule_simon_tail needs b > 1");
  if (k0 < 0 || !(static_cast<double>(k0) + a > 0)) throw urn_error("yule_simon_tail needs k0 >= 0 and k0 + a > 0");
  if (k_max < k0) return 1.0;
  const double x = static_cast<double>(k_max + 1) + a;
  const double x0 = static_cast<double>(k0) + a;
  return std::exp(log_gamma(x) - log_gamma(x + b - 1.0) - log_gamma(x0) + log_gamma(x0 + b - 1.0));
}

double yule_simon_classic(std::int64_t k, double rho) {
  if (!(rho > 0)) throw urn_error("yule_simon_classic needs rho > 0");
  if (k < 1) return 0.0;
  return rho * beta_fn(static_cast<double>(k), rho + 1.0);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t substream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(substream), static_cast<std::uint32_t>(substream >> 32)};
  engine_.seed(seq);
}

double RandomStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RandomStream::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void UrnConfig::validate() const {
  if (n_urns < 1) throw urn_error("n_urns must be >= 1");
  if (total_balls < 0) throw urn_error("total_balls must be >= 0");
  if (k0 < 0) throw urn_error("k0 must be >= 0");
  if (!(static_cast<double>(k0) + a > 0)) throw urn_error("attachment weight k0 + a must be positive");
  if (capacity && *capacity < k0) throw urn_error("capacity must be >= k0");
  if (n_urns > std::numeric_limits<std::int32_t>::max()) throw urn_error("too many urns");
}

CapacityExhausted::CapacityExhausted(std::int64_t placed, UrnOutcome partial)
    : Error("urnsim", "all urns at capacity after placing " + std::to_string(placed) + " balls"),
      placed_(placed),
      partial_(std::move(partial)) {}

UrnOutcome simulate_urns(const UrnConfig& config, std::uint64_t substream) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.n_urns);
  UrnOutcome out;
  out.occupancy.assign(n, config.k0);
  if (config.trace) out.choices.reserve(static_cast<std::size_t>(config.total_balls));

  const auto at_capacity = [&](std::int64_t k) { return config.capacity && k >= *config.capacity; };
  FenwickTree weights(n);
  std::size_t open = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!at_capacity(config.k0)) {
      weights.add(i, static_cast<double>(config.k0) + config.a);
      ++open;
    }
  }

  RandomStream rng(config.seed, substream);
  for (out.placed = 0; out.placed < config.total_balls; ++out.placed) {
    if (open == 0) throw CapacityExhausted(out.placed, out);
    std::size_t i = weights.find(rng.uniform() * weights.total());
    // Rounding can land on a closed urn at the boundary; step to an open one.
    if (at_capacity(out.occupancy[i])) {
      std::size_t j = i;
      while (j + 1 < n && at_capacity(out.occupancy[j])) ++j;
      if (at_capacity(out.occupancy[j])) {
        j = i;
        while (j > 0 && at_capacity(out.occupancy[j])) --j;
      }
      i = j;
    }
    ++out.occupancy[i];
    if (at_capacity(out.occupancy[i])) {
      weights.add(i, -(static_cast<double>(out.occupancy[i] - 1) + config.a));
      --open;
    } else {
      weights.add(i, 1.0);
    }
    if (config.trace) out.choices.push_back(static_cast<std::int32_t>(i));
  }
  return out;
}

ReplicateSummary simulate_replicates(const UrnConfig& config, int replicates) {
  if (replicates < 1) throw urn_error("need at least one replicate");
  ReplicateSummary s;
  const auto n = static_cast<std::size_t>(config.n_urns);
  for (int r = 0; r < replicates; ++r) {
    auto occ = simulate_urns(config, static_cast<std::uint64_t>(r)).occupancy;
    std::sort(occ.begin(), occ.end(), std::greater<>());
    s.sorted_occupancy.push_back(std::move(occ));
  }
  s.mean.assign(n, 0.0);
  s.stddev.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0;
    for (const auto& occ : s.sorted_occupancy) sum += static_cast<double>(occ[i]);
    const double mean = sum / replicates;
    double ss = 0;
    for (const auto& occ : s.sorted_occupancy) ss += (static_cast<double>(occ[i]) - mean) * (static_cast<double>(occ[i]) - mean);
    s.mean[i] = mean;
    s.stddev[i] = replicates > 1 ? std::sqrt(ss / (replicates - 1)) : 0.0;
  }
  return s;
}

std::string occupancy_csv(const UrnOutcome& outcome) {
  std::string out = "urn_id,occupancy\n";
  for (std::size_t i = 0; i < outcome.occupancy.size(); ++i)
    out += std::to_string(i) + "," + std::to_string(outcome.occupancy[i]) + "\n";
  return out;
}

nlohmann::json to_json(const UrnConfig& c) {
  return {{"n_urns", c.n_urns},
          {"total_balls", c.total_balls},
          {"a", json_real(c.a)},
          {"k0", c.k0},
          {"capacity", c.capacity ? nlohmann::json(*c.capacity) : nlohmann::json(nullptr)},
          {"seed", c.seed},
          {"rng", "mt19937_64 seeded by seed_seq(seed_lo, seed_hi, substream_lo, substream_hi)"}};
}

nlohmann::json to_json(const ReplicateSummary& s) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < s.mean.size(); ++i)
    rows.push_back({{"position", i + 1}, {"mean", json_real(s.mean[i])}, {"stddev", json_real(s.stddev[i])}});
  return {{"replicates", s.sorted_occupancy.size()}, {"sorted_positions", rows}};
}

rank::RankedSeries occupancy_series(const std::vector<std::int64_t>& occupancy) {
  std::vector<rank::Item> items;
  items.reserve(occupancy.size());
  for (std::size_t i = 0; i < occupancy.size(); ++i) {
    const std::string id = "urn" + std::to_string(i);
    items.push_back({id, id, static_cast<double>(occupancy[i])});
  }
  return rank::rank_desc(items, rank::TieBreak::entity_id, "occupancy");
}

rank::RankedSeries generate_ranksize(const fit::RankSizeModel& model, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0)) throw urn_error("noise sigma must be >= 0");
  const auto N = static_cast<std::int64_t>(std::floor(model.N));
  RandomStream rng(seed);
  std::vector<rank::Item> items;
  items.reserve(static_cast<std::size_t>(N));
  const std::size_t width = std::to_string(N).size();
  for (std::int64_t r = 1; r <= N; ++r) {
    double y = fit::model_eval(model, static_cast<double>(r));
    if (sigma > 0) y *= std::exp(sigma * rng.normal());
    std::string digits = std::to_string(r);
    digits.insert(0, width - digits.size(), '0');
    const std::string id = "r" + digits;
    items.push_back({id, id, y});
  }
  return rank::rank_desc(items, rank::TieBreak::entity_id, "synthetic");
}

}  // namespace ranklaw::urnsim
