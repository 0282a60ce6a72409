#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ranklaw::ingest {

/// A year's value; std::nullopt is the explicit missing marker.
using Value = std::optional<double>;

struct EntityRecord {
  std::string entity_id;
  std::string name;
  std::string region;
  std::string province;
  std::map<int, Value> values;  // every panel year has a key

  Value value(int year) const;
};

/// Per-year region membership change for one entity. Years not listed use the
/// record's own region field.
struct RegionOverride {
  std::string entity_id;
  int year = 0;
  std::string region;
};

struct PanelSchema {
  std::string quantity_label = "value";
  /// Closed set of valid region codes; empty accepts any region.
  std::set<std::string> regions;
  /// When set, parse_panel fails unless exactly this many records are read.
  std::optional<std::size_t> expected_count;
  std::vector<RegionOverride> region_overrides;
};

struct Panel {
  std::string quantity_label;
  std::vector<int> years;  // ascending
  std::vector<EntityRecord> records;
  std::string provenance;
  std::vector<RegionOverride> region_overrides;

  const EntityRecord* find(std::string_view entity_id) const;
  /// Region of an entity in a given year after overrides.
  const std::string& region_of(const EntityRecord& record, int year) const;
  /// Σ over entities of the year's value; throws DataError on a missing value.
  double year_total(int year) const;
};

struct MergeEntry {
  std::string target_id;
  std::string target_name;
  std::vector<std::string> component_ids;
  int effective_year = 0;
};

struct MergeLedger {
  std::vector<MergeEntry> entries;

  /// Throws InvalidArgument unless components are non-empty and disjoint and
  /// no target is also a component.
  void validate() const;
};

struct RegionAggregate {
  std::string region;
  long long n_cities = 0;
  double n_inhabitants = 0.0;
  std::map<int, double> ati_by_year;
  double ati_mean = 0.0;
};

/// The 20 Italian region names as spelled in the regional count tables.
const std::set<std::string>& italian_regions();

/// Parses delimited text. The delimiter (comma or tab) is detected from the
/// header. Long form has columns entity_id,name,region,province,year,value;
/// wide form has entity_id, optional name/region/province, and one column per
/// integer year. Empty, "NA" and "NaN" cells are missing markers.
Panel parse_panel(std::string_view text, const PanelSchema& schema = {});
Panel read_panel_file(const std::string& path, const PanelSchema& schema = {});

/// Ledger file: target_id,target_name,component_ids,effective_year with the
/// component ids joined by ';'.
MergeLedger parse_merge_ledger(std::string_view text);
MergeLedger read_merge_ledger_file(const std::string& path);

/// Replaces each entry's components by one target record whose yearly value is
/// the sum of its components. A target year is missing if any component is
/// missing that year. Region and province come from the first component.
Panel apply_merge_ledger(const Panel& panel, const MergeLedger& ledger);

/// One aggregate per region, sorted by region code. Population is taken from
/// the latest year of pop_panel; ati_mean averages all ATI panel years.
std::vector<RegionAggregate> aggregate_by_region(const Panel& ati_panel, const Panel& pop_panel);

/// Unweighted mean over the window for every entity.
std::map<std::string, double> average_over_years(const Panel& panel, const std::vector<int>& window);

/// Canonical serialization: sorted keys, missing values as null.
nlohmann::json to_json(const Panel& panel);
nlohmann::json to_json(const RegionAggregate& aggregate);

}  // namespace ranklaw::ingest
