#include "ranklaw/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "ranklaw/error.hpp"
#include "ranklaw/format.hpp"

namespace ranklaw::ingest {
namespace {

DataError data_error(const std::string& what) { return DataError("ingest", what); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Splits one line, honouring double-quoted fields ("" escapes a quote).
std::vector<std::string> split_fields(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.emplace_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.emplace_back(trim(field));
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

char detect_delimiter(std::string_view header) {
  const auto tabs = std::count(header.begin(), header.end(), '\t');
  const auto commas = std::count(header.begin(), header.end(), ',');
  return tabs > commas ? '\t' : ',';
}

std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

bool is_missing(std::string_view s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

Value parse_value(std::string_view s, std::size_t row) {
  if (is_missing(s)) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw data_error("malformed value '" + std::string(s) + "' at row " + std::to_string(row));
  if (v < 0.0) throw data_error("negative value at row " + std::to_string(row));
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Header {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::string> names;

  std::optional<std::size_t> column(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

}  // namespace

Value EntityRecord::value(int year) const {
  auto it = values.find(year);
  return it == values.end() ? std::nullopt : it->second;
}

const EntityRecord* Panel::find(std::string_view entity_id) const {
  for (const auto& r : records)
    if (r.entity_id == entity_id) return &r;
  return nullptr;
}

const std::string& Panel::region_of(const EntityRecord& record, int year) const {
  for (const auto& o : region_overrides)
    if (o.year == year && o.entity_id == record.entity_id) return o.region;
  return record.region;
}

double Panel::year_total(int year) const {
  double total = 0.0;
  for (const auto& r : records) {
    auto v = r.value(year);
    if (!v) throw data_error("missing value for '" + r.entity_id + "' in " + std::to_string(year));
    total += *v;
  }
  return total;
}

const std::set<std::string>& italian_regions() {
  static const std::set<std::string> regions{
      "Abruzzo", "Basilicata", "Calabria", "Campania", "Emilia-Romagna", "Friuli-Venezia Giulia",
      "Lazio", "Liguria", "Lombardia", "Marche", "Molise", "Piemonte", "Puglia", "Sardegna",
      "Sicilia", "Toscana", "Trentino-Alto Adige", "Umbria", "Valle d'Aosta", "Veneto"};
  return regions;
}

Panel parse_panel(std::string_view text, const PanelSchema& schema) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const auto lines = split_lines(text);
  std::size_t header_line = 0;
  while (header_line < lines.size() && trim(lines[header_line]).empty()) ++header_line;
  if (header_line == lines.size()) throw data_error("empty input");

  const char delim = detect_delimiter(lines[header_line]);
  Header header;
  header.names = split_fields(lines[header_line], delim);
  for (std::size_t i = 0; i < header.names.size(); ++i) {
    if (!header.index.emplace(header.names[i], i).second)
      throw data_error("duplicate header column '" + header.names[i] + "'");
  }
  const auto id_col = header.column("entity_id");
  if (!id_col) throw data_error("header has no entity_id column");
  const auto name_col = header.column("name");
  const auto region_col = header.column("region");
  const auto province_col = header.column("province");
  const auto year_col = header.column("year");
  const auto value_col = header.column("value");
  const bool long_form = year_col && value_col;

  std::vector<std::pair<int, std::size_t>> year_cols;
  if (!long_form) {
    for (std::size_t i = 0; i < header.names.size(); ++i) {
      const auto& h = header.names[i];
      if (h == "entity_id" || h == "name" || h == "region" || h == "province") continue;
      auto y = parse_int(h);
      if (!y) throw data_error("unexpected header column '" + h + "' (expected a year)");
      year_cols.emplace_back(static_cast<int>(*y), i);
    }
    if (year_cols.empty()) throw data_error("wide-form header has no year columns");
  }

  Panel panel;
  panel.quantity_label = schema.quantity_label;
  panel.region_overrides = schema.region_overrides;
  std::unordered_map<std::string, std::size_t> by_id;
  std::set<int> years;
  for (auto& [y, col] : year_cols) years.insert(y);

  for (std::size_t li = header_line + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const std::size_t row = li + 1;  // 1-based line number in the file
    auto fields = split_fields(lines[li], delim);
    if (fields.size() != header.names.size())
      throw data_error("malformed row " + std::to_string(row) + ": expected " +
                       std::to_string(header.names.size()) + " fields, got " + std::to_string(fields.size()));
    const std::string& id = fields[*id_col];
    if (id.empty()) throw data_error("malformed row " + std::to_string(row) + ": empty entity_id");

    auto fill_meta = [&](EntityRecord& rec) {
      rec.entity_id = id;
      rec.name = name_col ? fields[*name_col] : id;
      rec.region = region_col ? fields[*region_col] : "";
      rec.province = province_col ? fields[*province_col] : "";
      if (!schema.regions.empty() && !schema.regions.contains(rec.region))
        throw data_error("unknown region code '" + rec.region + "' at row " + std::to_string(row));
    };

    if (long_form) {
      auto y = parse_int(fields[*year_col]);
      if (!y) throw data_error("malformed year '" + fields[*year_col] + "' at row " + std::to_string(row));
      const int year = static_cast<int>(*y);
      Value v = parse_value(fields[*value_col], row);
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        EntityRecord rec;
        fill_meta(rec);
        it = by_id.emplace(id, panel.records.size()).first;
        panel.records.push_back(std::move(rec));
      } else {
        const auto& rec = panel.records[it->second];
        if ((name_col && rec.name != fields[*name_col]) || (region_col && rec.region != fields[*region_col]))
          throw data_error("inconsistent metadata for '" + id + "' at row " + std::to_string(row));
      }
      auto& rec = panel.records[it->second];
      if (rec.values.contains(year))
        throw data_error("duplicate entity_id '" + id + "' for year " + std::to_string(year) + " at row " +
                         std::to_string(row));
      rec.values[year] = v;
      years.insert(year);
    } else {
      if (by_id.contains(id)) throw data_error("duplicate entity_id '" + id + "' at row " + std::to_string(row));
      EntityRecord rec;
      fill_meta(rec);
      for (auto& [year, col] : year_cols) rec.values[year] = parse_value(fields[col], row);
      by_id.emplace(id, panel.records.size());
      panel.records.push_back(std::move(rec));
    }
  }

  panel.years.assign(years.begin(), years.end());
  // Long form may omit rows; those years become explicit missing markers.
  for (auto& rec : panel.records)
    for (int y : panel.years) rec.values.try_emplace(y, std::nullopt);

  if (schema.expected_count && panel.records.size() != *schema.expected_count)
    throw data_error("expected " + std::to_string(*schema.expected_count) + " records, read " +
                     std::to_string(panel.records.size()));
  return panel;
}

Panel read_panel_file(const std::string& path, const PanelSchema& schema) {
  Panel p = parse_panel(read_file(path), schema);
  p.provenance = path;
  return p;
}

void MergeLedger::validate() const {
  std::unordered_set<std::string> components;
  for (const auto& e : entries) {
    if (e.component_ids.empty())
      throw InvalidArgument("ingest", "merge entry '" + e.target_id + "' has no components");
    for (const auto& c : e.component_ids)
      if (!components.insert(c).second)
        throw InvalidArgument("ingest", "component '" + c + "' appears in more than one merge entry");
  }
  for (const auto& e : entries)
    if (components.contains(e.target_id))
      throw InvalidArgument("ingest", "merge target '" + e.target_id + "' is also a component");
}

MergeLedger parse_merge_ledger(std::string_view text) {
  MergeLedger ledger;
  const auto lines = split_lines(text);
  bool header_seen = false;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const char delim = detect_delimiter(lines[li]);
    auto fields = split_fields(lines[li], delim);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() >= 1 && fields[0] == "target_id") continue;
    }
    if (fields.size() != 4) throw data_error("malformed ledger row " + std::to_string(li + 1));
    MergeEntry e;
    e.target_id = fields[0];
    e.target_name = fields[1];
    std::string_view comps = fields[2];
    while (!comps.empty()) {
      auto pos = comps.find(';');
      auto c = trim(comps.substr(0, pos));
      if (!c.empty()) e.component_ids.emplace_back(c);
      if (pos == std::string_view::npos) break;
      comps.remove_prefix(pos + 1);
    }
    auto y = parse_int(fields[3]);
    if (!y) throw data_error("malformed effective_year at ledger row " + std::to_string(li + 1));
    e.effective_year = static_cast<int>(*y);
    ledger.entries.push_back(std::move(e));
  }
  ledger.validate();
  return ledger;
}

MergeLedger read_merge_ledger_file(const std::string& path) { return parse_merge_ledger(read_file(path)); }

Panel apply_merge_ledger(const Panel& panel, const MergeLedger& ledger) {
  ledger.validate();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < panel.records.size(); ++i) index.emplace(panel.records[i].entity_id, i);

  std::unordered_set<std::string> absorbed;
  for (const auto& e : ledger.entries)
    for (const auto& c : e.component_ids) {
      if (!index.contains(c)) throw data_error("unknown component_id '" + c + "' in merge '" + e.target_id + "'");
      absorbed.insert(c);
    }
  for (const auto& e : ledger.entries)
    if (index.contains(e.target_id) && !absorbed.contains(e.target_id))
      throw data_error("merge target '" + e.target_id + "' collides with a surviving record");

  Panel out;
  out.quantity_label = panel.quantity_label;
  out.years = panel.years;
  out.provenance = panel.provenance;
  out.region_overrides = panel.region_overrides;
  for (const auto& r : panel.records)
    if (!absorbed.contains(r.entity_id)) out.records.push_back(r);

  for (const auto& e : ledger.entries) {
    const auto& first = panel.records[index.at(e.component_ids.front())];
    EntityRecord target;
    target.entity_id = e.target_id;
    target.name = e.target_name;
    target.region = first.region;
    target.province = first.province;
    for (int y : panel.years) {
      Value sum = 0.0;
      for (const auto& c : e.component_ids) {
        auto v = panel.records[index.at(c)].value(y);
        if (!v) {
          sum = std::nullopt;
          break;
        }
        *sum += *v;
      }
      target.values[y] = sum;
    }
    out.records.push_back(std::move(target));
  }
  return out;
}

std::vector<RegionAggregate> aggregate_by_region(const Panel& ati_panel, const Panel& pop_panel) {
  if (pop_panel.years.empty()) throw data_error("population panel has no years");
  const int pop_year = pop_panel.years.back();

  std::unordered_map<std::string, const EntityRecord*> pop_index;
  for (const auto& r : pop_panel.records) pop_index.emplace(r.entity_id, &r);
  for (const auto& r : ati_panel.records)
    if (!pop_index.contains(r.entity_id))
      throw data_error("entity '" + r.entity_id + "' is in the ATI panel but not the population panel");
  if (pop_panel.records.size() != ati_panel.records.size()) {
    std::unordered_set<std::string> ati_ids;
    for (const auto& r : ati_panel.records) ati_ids.insert(r.entity_id);
    for (const auto& r : pop_panel.records)
      if (!ati_ids.contains(r.entity_id))
        throw data_error("entity '" + r.entity_id + "' is in the population panel but not the ATI panel");
  }

  std::map<std::string, RegionAggregate> by_region;
  for (const auto& r : ati_panel.records) {
    auto& agg = by_region[r.region];
    agg.region = r.region;
    agg.n_cities += 1;
    auto pop = pop_index.at(r.entity_id)->value(pop_year);
    if (!pop) throw data_error("missing population for '" + r.entity_id + "'");
    agg.n_inhabitants += *pop;
    for (int y : ati_panel.years) {
      auto v = r.value(y);
      if (!v) throw data_error("missing value for '" + r.entity_id + "' in " + std::to_string(y));
      by_region[ati_panel.region_of(r, y)].ati_by_year[y] += *v;
    }
  }

  std::vector<RegionAggregate> out;
  for (auto& [region, agg] : by_region) {
    agg.region = region;
    double total = 0.0;
    for (int y : ati_panel.years) total += agg.ati_by_year[y];
    agg.ati_mean = ati_panel.years.empty() ? 0.0 : total / static_cast<double>(ati_panel.years.size());
    out.push_back(std::move(agg));
  }
  return out;
}

std::map<std::string, double> average_over_years(const Panel& panel, const std::vector<int>& window) {
  if (window.empty()) throw InvalidArgument("ingest", "empty averaging window");
  for (int y : window)
    if (!std::binary_search(panel.years.begin(), panel.years.end(), y))
      throw InvalidArgument("ingest", "window year " + std::to_string(y) + " not in panel");
  std::map<std::string, double> out;
  for (const auto& r : panel.records) {
    double sum = 0.0;
    for (int y : window) {
      auto v = r.value(y);
      if (!v) throw data_error("missing value for '" + r.entity_id + "' in " + std::to_string(y));
      sum += *v;
    }
    out[r.entity_id] = sum / static_cast<double>(window.size());
  }
  return out;
}

nlohmann::json to_json(const Panel& panel) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : panel.records) {
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [y, v] : r.values) values[std::to_string(y)] = v ? json_real(*v) : nlohmann::json(nullptr);
    records.push_back({{"entity_id", r.entity_id},
                       {"name", r.name},
                       {"region", r.region},
                       {"province", r.province},
                       {"values", values}});
  }
  nlohmann::json overrides = nlohmann::json::array();
  for (const auto& o : panel.region_overrides)
    overrides.push_back({{"entity_id", o.entity_id}, {"year", o.year}, {"region", o.region}});
  return {{"quantity_label", panel.quantity_label},
          {"years", panel.years},
          {"provenance", panel.provenance},
          {"region_overrides", overrides},
          {"records", records}};
}

nlohmann::json to_json(const RegionAggregate& a) {
  nlohmann::json by_year = nlohmann::json::object();
  for (const auto& [y, v] : a.ati_by_year) by_year[std::to_string(y)] = json_real(v);
  return {{"region", a.region},
          {"n_cities", a.n_cities},
          {"n_inhabitants", json_real(a.n_inhabitants)},
          {"ati_by_year", by_year},
          {"ati_mean", json_real(a.ati_mean)}};
}

}  // namespace ranklaw::ingest
