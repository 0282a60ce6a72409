#include "ranklaw/rank.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "ranklaw/error.hpp"
#include "ranklaw/format.hpp"

namespace ranklaw::rank {

TieBreak parse_tiebreak(const std::string& s) {
  if (s == "lexical" || s == "lexical_name") return TieBreak::lexical_name;
  if (s == "id" || s == "entity_id") return TieBreak::entity_id;
  if (s == "average" || s == "average_rank") return TieBreak::average_rank;
  throw InvalidArgument("rank", "unknown tie rule '" + s + "'");
}

std::string to_string(TieBreak t) {
  switch (t) {
    case TieBreak::lexical_name: return "lexical";
    case TieBreak::entity_id: return "id";
    case TieBreak::average_rank: return "average";
  }
  return "?";
}

std::vector<double> RankedSeries::values() const {
  std::vector<double> v;
  v.reserve(entries.size());
  for (const auto& e : entries) v.push_back(e.value);
  return v;
}

std::vector<double> RankedSeries::ranks() const {
  std::vector<double> v;
  v.reserve(entries.size());
  for (const auto& e : entries) v.push_back(e.rank);
  return v;
}

std::vector<double> RankPairs::x() const {
  std::vector<double> v;
  v.reserve(entries.size());
  for (const auto& e : entries) v.push_back(e.r_x);
  return v;
}

std::vector<double> RankPairs::y() const {
  std::vector<double> v;
  v.reserve(entries.size());
  for (const auto& e : entries) v.push_back(e.r_y);
  return v;
}

RankedSeries rank_desc(std::span<const Item> items, TieBreak rule, std::string criterion) {
  if (items.empty()) throw InvalidArgument("rank", "cannot rank an empty series");
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ia = items[a];
    const auto& ib = items[b];
    if (ia.value != ib.value) return ia.value > ib.value;
    if (rule == TieBreak::lexical_name && ia.name != ib.name) return ia.name < ib.name;
    return ia.entity_id < ib.entity_id;
  });

  RankedSeries out;
  out.criterion = std::move(criterion);
  out.tiebreak = rule;
  out.entries.reserve(items.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto& it = items[order[pos]];
    out.entries.push_back({it.entity_id, it.name, it.value, static_cast<double>(pos + 1)});
  }
  for (std::size_t first = 0; first < out.entries.size();) {
    std::size_t last = first;
    while (last + 1 < out.entries.size() && out.entries[last + 1].value == out.entries[first].value) ++last;
    if (last > first) {
      out.tie_groups.push_back({first, last});
      if (rule == TieBreak::average_rank) {
        const double mean_rank = 0.5 * static_cast<double>(first + last) + 1.0;
        for (std::size_t i = first; i <= last; ++i) out.entries[i].rank = mean_rank;
      }
    }
    first = last + 1;
  }
  return out;
}

RankedSeries rank_desc(const std::map<std::string, double>& values, TieBreak rule, std::string criterion) {
  std::vector<Item> items;
  items.reserve(values.size());
  for (const auto& [id, v] : values) items.push_back({id, id, v});
  return rank_desc(items, rule, std::move(criterion));
}

RankPairs pair_ranks(const RankedSeries& x, const RankedSeries& y) {
  std::unordered_map<std::string, double> y_rank;
  y_rank.reserve(y.size());
  for (const auto& e : y.entries) y_rank.emplace(e.entity_id, e.rank);

  std::vector<std::string> missing;
  RankPairs out;
  out.entries.reserve(x.size());
  for (const auto& e : x.entries) {
    auto it = y_rank.find(e.entity_id);
    if (it == y_rank.end()) {
      missing.push_back(e.entity_id);
      continue;
    }
    out.entries.push_back({e.entity_id, e.rank, it->second});
  }
  if (!missing.empty() || x.size() != y.size()) {
    std::unordered_map<std::string, bool> in_x;
    for (const auto& e : x.entries) in_x.emplace(e.entity_id, true);
    for (const auto& e : y.entries)
      if (!in_x.contains(e.entity_id)) missing.push_back(e.entity_id);
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? "," : "") + missing[i];
    if (missing.size() > 20) list += ",...";
    throw DataError("rank", "entity sets differ (" + std::to_string(missing.size()) + " ids): " + list);
  }
  return out;
}

RankDiff rank_diff_series(const RankPairs& pairs) {
  RankDiff out;
  out.differences.reserve(pairs.n());
  std::size_t nonpositive = 0;
  for (const auto& p : pairs.entries) {
    const double d = p.r_y - p.r_x;
    out.differences.push_back(d);
    if (d <= 0.0) ++nonpositive;
  }
  out.summary = stats::describe(out.differences);
  out.fraction_nonpositive = static_cast<double>(nonpositive) / static_cast<double>(pairs.n());
  return out;
}

std::string to_csv(const RankedSeries& series) {
  std::string out = "rank,entity_id,value\n";
  for (const auto& e : series.entries) out += fmt_real(e.rank) + "," + e.entity_id + "," + fmt_real(e.value) + "\n";
  return out;
}

}  // namespace ranklaw::rank
