#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ranklaw/stats.hpp"

namespace ranklaw::rank {

enum class TieBreak {
  lexical_name,  // equal values ordered by name, then entity_id
  entity_id,     // equal values ordered by entity_id
  average_rank,  // equal values share the mean of their rank span
};

TieBreak parse_tiebreak(const std::string& s);  // "lexical" | "id" | "average"
std::string to_string(TieBreak t);

struct Item {
  std::string entity_id;
  std::string name;
  double value = 0.0;
};

struct RankedEntry {
  std::string entity_id;
  std::string name;
  double value = 0.0;
  double rank = 0.0;  // 1 = largest value
};

/// Positions [first, last] (0-based, inclusive) of a run of equal values.
struct TieGroup {
  std::size_t first = 0;
  std::size_t last = 0;
};

struct RankedSeries {
  std::string criterion;
  std::vector<RankedEntry> entries;  // rank order
  std::vector<TieGroup> tie_groups;
  TieBreak tiebreak = TieBreak::lexical_name;

  std::size_t size() const { return entries.size(); }
  std::vector<double> values() const;
  std::vector<double> ranks() const;
};

struct RankPair {
  std::string entity_id;
  double r_x = 0.0;
  double r_y = 0.0;
};

struct RankPairs {
  std::vector<RankPair> entries;
  std::size_t n() const { return entries.size(); }
  std::vector<double> x() const;
  std::vector<double> y() const;
};

/// Ranks in decreasing value order.
RankedSeries rank_desc(std::span<const Item> items, TieBreak rule = TieBreak::lexical_name,
                       std::string criterion = {});
/// Convenience overload; names default to the entity ids.
RankedSeries rank_desc(const std::map<std::string, double>& values, TieBreak rule = TieBreak::lexical_name,
                       std::string criterion = {});

/// Joins two rankings of the same entity set; entries follow x's rank order.
RankPairs pair_ranks(const RankedSeries& x, const RankedSeries& y);

struct RankDiff {
  std::vector<double> differences;  // r_y - r_x, in pair order
  stats::SummaryStats summary;
  double fraction_nonpositive = 0.0;
};

RankDiff rank_diff_series(const RankPairs& pairs);

/// Delimited export "rank,entity_id,value".
std::string to_csv(const RankedSeries& series);

}  // namespace ranklaw::rank
