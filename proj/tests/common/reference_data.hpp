#pragma once

#include <array>
#include <string>
#include <vector>

#include "ranklaw/rank.hpp"

namespace ranklaw::testdata {

struct RegionCount {
  const char* name;
  double cities;
};

// Cities per region in 2011.
inline constexpr std::array<RegionCount, 20> kRegionCounts2011{{
    {"Lombardia", 1544}, {"Piemonte", 1206}, {"Veneto", 581}, {"Campania", 551},
    {"Calabria", 409},   {"Sicilia", 390},   {"Lazio", 378},  {"Sardegna", 377},
    {"Emilia-Romagna", 348}, {"Trentino-Alto Adige", 333}, {"Abruzzo", 305}, {"Toscana", 287},
    {"Puglia", 258},     {"Marche", 239},    {"Liguria", 235}, {"Friuli-Venezia Giulia", 218},
    {"Molise", 136},     {"Basilicata", 131}, {"Umbria", 92},  {"Valle d'Aosta", 74},
}};

inline std::vector<double> region_count_values() {
  std::vector<double> v;
  for (const auto& r : kRegionCounts2011) v.push_back(r.cities);
  return v;
}

inline rank::RankedSeries region_count_series() {
  std::vector<rank::Item> items;
  for (const auto& r : kRegionCounts2011) items.push_back({r.name, r.name, r.cities});
  return rank::rank_desc(items, rank::TieBreak::lexical_name, "cities per region");
}

}  // namespace ranklaw::testdata
