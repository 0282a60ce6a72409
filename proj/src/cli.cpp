#include "ranklaw/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ranklaw/corr.hpp"
#include "ranklaw/error.hpp"
#include "ranklaw/format.hpp"
#include "ranklaw/ingest.hpp"
#include "ranklaw/regime.hpp"
#include "ranklaw/stats.hpp"
#include "ranklaw/urnsim.hpp"

namespace ranklaw::cli {
namespace fs = std::filesystem;
using nlohmann::json;

Command parse_command(const std::string& s) {
  static const std::pair<const char*, Command> names[] = {
      {"ingest", Command::ingest}, {"describe", Command::describe}, {"rank", Command::rank},
      {"corr", Command::corr},     {"fit", Command::fit},           {"regime", Command::regime},
      {"simulate", Command::simulate}, {"report", Command::report}};
  for (const auto& [name, c] : names)
    if (s == name) return c;
  throw InvalidArgument("cli", "unknown command '" + s + "'");
}

std::string to_string(Command c) {
  switch (c) {
    case Command::ingest: return "ingest";
    case Command::describe: return "describe";
    case Command::rank: return "rank";
    case Command::corr: return "corr";
    case Command::fit: return "fit";
    case Command::regime: return "regime";
    case Command::simulate: return "simulate";
    case Command::report: return "report";
  }
  return "?";
}

namespace {

// Advisory lock plus bookkeeping of written files so a failed run can undo
// its partial output.
class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
    lock_ = dir_ / ".ranklaw.lock";
    std::FILE* f = std::fopen(lock_.c_str(), "wx");
    if (!f) throw Error("cli", "output directory '" + dir_.string() + "' is locked by another run");
    std::fclose(f);
  }
  ~OutputDir() {
    std::error_code ec;
    fs::remove(lock_, ec);
  }
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cli", "cannot write '" + path.string() + "'");
    written_.push_back(path.string());
    out << content;
    if (!out) throw Error("cli", "write failed for '" + path.string() + "'");
  }

  void rollback() {
    for (const auto& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    written_.clear();
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  fs::path dir_;
  fs::path lock_;
  std::vector<std::string> written_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

ingest::Panel load_panel(const std::string& path, const std::string& merges, const std::string& label) {
  if (path.empty()) throw InvalidArgument("cli", "--" + label + " is required for this command");
  ingest::PanelSchema schema;
  schema.quantity_label = label;
  auto panel = ingest::read_panel_file(path, schema);
  if (!merges.empty()) panel = ingest::apply_merge_ledger(panel, ingest::read_merge_ledger_file(merges));
  return panel;
}

rank::RankedSeries average_series(const ingest::Panel& panel, rank::TieBreak ties, const std::set<std::string>& drop = {}) {
  const auto avg = ingest::average_over_years(panel, panel.years);
  std::vector<rank::Item> items;
  items.reserve(panel.records.size());
  for (const auto& r : panel.records)
    if (!drop.contains(r.entity_id)) items.push_back({r.entity_id, r.name, avg.at(r.entity_id)});
  return rank::rank_desc(items, ties, panel.quantity_label);
}

std::vector<std::pair<std::string, stats::SummaryStats>> describe_panel(const ingest::Panel& panel) {
  std::vector<std::pair<std::string, stats::SummaryStats>> cols;
  for (int y : panel.years) {
    std::vector<double> v;
    v.reserve(panel.records.size());
    for (const auto& r : panel.records) {
      auto x = r.value(y);
      if (!x) throw DataError("stats", "missing value for '" + r.entity_id + "' in " + std::to_string(y));
      v.push_back(*x);
    }
    cols.emplace_back(std::to_string(y), stats::describe(v));
  }
  if (panel.years.size() > 1) {
    const auto avg = ingest::average_over_years(panel, panel.years);
    std::vector<double> v;
    for (const auto& [_, x] : avg) v.push_back(x);
    cols.emplace_back("avg", stats::describe(v));
  }
  return cols;
}

json describe_json(const std::vector<std::pair<std::string, stats::SummaryStats>>& cols) {
  json out = json::object();
  for (const auto& [label, s] : cols) out[label] = stats::to_json(s);
  return out;
}

fit::FitResult run_fit(const rank::RankedSeries& series, const RunConfig& cfg, std::vector<std::string> excluded) {
  fit::FitOptions opts;
  opts.scale = cfg.scale;
  const double A = cfg.A.value_or(fit::default_amplitude(series));
  auto result = fit::fit_model(series, cfg.model, A, opts);
  result.excluded = std::move(excluded);
  return result;
}

std::string section(const std::string& title) { return "\n== " + title + " ==\n"; }

struct Command_ctx {
  const RunConfig& cfg;
  OutputDir& out;
  json doc = json::object();
  std::string text;
};

void cmd_ingest(Command_ctx& c) {
  auto panel = load_panel(c.cfg.input, c.cfg.merges, "input");
  c.out.write("panel.json", dump(ingest::to_json(panel)));
  const auto avg = ingest::average_over_years(panel, panel.years);
  std::string csv = "entity_id,name,region,mean\n";
  for (const auto& r : panel.records) csv += r.entity_id + "," + r.name + "," + r.region + "," + fmt_real(avg.at(r.entity_id)) + "\n";
  c.out.write("averages.csv", csv);

  c.doc["records"] = panel.records.size();
  c.doc["years"] = panel.years;
  c.text += "records  " + std::to_string(panel.records.size()) + "\nyears   ";
  for (int y : panel.years) c.text += " " + std::to_string(y);
  c.text += "\n";
  for (int y : panel.years) c.text += "total " + std::to_string(y) + "  " + fmt_real(panel.year_total(y)) + "\n";

  if (!c.cfg.population.empty()) {
    auto pop = load_panel(c.cfg.population, "", "population");
    const auto regions = ingest::aggregate_by_region(panel, pop);
    json rj = json::array();
    std::string rcsv = "region,n_cities,n_inhabitants,ati_mean\n";
    for (const auto& r : regions) {
      rj.push_back(ingest::to_json(r));
      rcsv += r.region + "," + std::to_string(r.n_cities) + "," + fmt_real(r.n_inhabitants) + "," + fmt_real(r.ati_mean) + "\n";
    }
    c.out.write("regions.csv", rcsv);
    c.doc["regions"] = rj;
    c.text += "regions  " + std::to_string(regions.size()) + "\n";
  }
}

void cmd_describe(Command_ctx& c) {
  auto panel = load_panel(c.cfg.input, c.cfg.merges, "input");
  const auto cols = describe_panel(panel);
  c.doc["summary"] = describe_json(cols);
  c.text += stats::summary_table(cols);

  const auto& last = cols.back();
  std::vector<double> series;
  const auto avg = ingest::average_over_years(panel, panel.years);
  for (const auto& [_, v] : avg) series.push_back(v);
  if (last.second.std_dev > 0) {
    std::string qq = "theoretical,sample\n";
    for (const auto& p : stats::qq_normal(series)) qq += fmt_real(p.theoretical) + "," + fmt_real(p.sample) + "\n";
    c.out.write("qq.csv", qq);
  }
}

void cmd_rank(Command_ctx& c) {
  auto panel = load_panel(c.cfg.input, c.cfg.merges, "input");
  const auto series = average_series(panel, c.cfg.ties);
  c.out.write("ranked.csv", rank::to_csv(series));
  c.doc["n"] = series.size();
  c.doc["tie_groups"] = series.tie_groups.size();
  c.doc["ties"] = rank::to_string(series.tiebreak);
  json top = json::array();
  for (std::size_t i = 0; i < series.size() && i < 10; ++i)
    top.push_back({{"rank", json_real(series.entries[i].rank)}, {"entity_id", series.entries[i].entity_id},
                   {"value", json_real(series.entries[i].value)}});
  c.doc["top"] = top;
  c.text += "n           " + std::to_string(series.size()) + "\n";
  c.text += "tie groups  " + std::to_string(series.tie_groups.size()) + "\n";
  c.text += "tie rule    " + rank::to_string(series.tiebreak) + "\n";
  for (std::size_t i = 0; i < series.size() && i < 10; ++i)
    c.text += fmt_real(series.entries[i].rank) + "  " + series.entries[i].name + "  " + fmt_real(series.entries[i].value) + "\n";
}

void append_mismatches(Command_ctx& c, const std::vector<corr::Mismatch>& mm, const std::string& key) {
  json arr = json::array();
  for (const auto& m : mm) {
    arr.push_back({{"field", m.field}, {"expected", json_real(m.expected)}, {"actual", json_real(m.actual)},
                   {"tolerance", json_real(m.tolerance)}});
    c.text += "MISMATCH " + m.field + ": expected " + fmt_real(m.expected) + ", computed " + fmt_real(m.actual) + "\n";
  }
  c.doc[key] = arr;
}

json load_expected(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cli", "cannot open expected-values file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("cli", std::string("malformed expected-values file: ") + e.what());
  }
}

void cmd_corr(Command_ctx& c) {
  auto panel = load_panel(c.cfg.input, c.cfg.merges, "input");
  const json expected = c.cfg.expected.empty() ? json::object() : load_expected(c.cfg.expected);
  bool did_something = false;
  if (!c.cfg.population.empty()) {
    auto pop = load_panel(c.cfg.population, "", "population");
    const auto x = average_series(panel, c.cfg.ties);
    const auto y = average_series(pop, c.cfg.ties);
    const auto report = corr::correlate(x, y);
    c.doc["correlation"] = corr::to_json(report);
    c.text += corr::to_text(report);
    if (expected.contains("correlation"))
      append_mismatches(c, corr::compare_expected(report, expected["correlation"]), "correlation_mismatches");
    did_something = true;
  }
  if (panel.years.size() >= 2) {
    const auto m = corr::pairwise_matrix(panel, panel.years, true, c.cfg.ties);
    c.out.write("pq_matrix.csv", m.pq_table());
    c.out.write("tau_z_matrix.csv", m.tau_z_table());
    c.doc["pairwise"] = corr::to_json(m);
    c.text += section("p (above) / q (below)") + m.pq_table('\t');
    c.text += section("tau (above) / Z (below)") + m.tau_z_table('\t');
    if (expected.contains("pairwise"))
      append_mismatches(c, corr::compare_expected(m, expected["pairwise"]), "pairwise_mismatches");
    did_something = true;
  }
  if (!did_something) throw InvalidArgument("cli", "corr needs --population or a multi-year --input panel");
}

void cmd_fit(Command_ctx& c) {
  auto panel = load_panel(c.cfg.input, c.cfg.merges, "input");
  const std::set<std::string> drop(c.cfg.exclude.begin(), c.cfg.exclude.end());
  auto series = average_series(panel, c.cfg.ties, drop);
  std::vector<std::string> excluded(c.cfg.exclude.begin(), c.cfg.exclude.end());
  if (c.cfg.drop_top > 0) {
    for (std::size_t i = 0; i < c.cfg.drop_top && i < series.size(); ++i) excluded.push_back(series.entries[i].entity_id);
    series = fit::remove_top_outliers(series, c.cfg.drop_top);
  }
  const auto result = run_fit(series, c.cfg, excluded);
  const auto flagged = fit::detect_outliers(series, result);
  c.out.write("curve.csv", fit::curve_csv(series, result));
  c.doc["fit"] = fit::to_json(result);
  c.doc["flagged_outliers"] = flagged;
  c.text += fit::to_text(result);
  if (!flagged.empty()) {
    c.text += "flagged    ";
    for (const auto& id : flagged) c.text += " " + id;
    c.text += "\n";
  }
}

struct PairedData {
  rank::RankedSeries ati;
  rank::RankedSeries pop;
};

PairedData paired(const RunConfig& cfg) {
  auto panel = load_panel(cfg.input, cfg.merges, "input");
  auto pop = load_panel(cfg.population, "", "population");
  return {average_series(panel, cfg.ties), average_series(pop, cfg.ties)};
}

void regime_sections(Command_ctx& c, const PairedData& d) {
  std::map<std::string, double> pop_value;
  for (const auto& e : d.pop.entries) pop_value.emplace(e.entity_id, e.value);

  regime::ScatterSet values{{}, "population", "ati"};
  regime::ScatterSet logs{{}, "ati", "population"};
  for (const auto& e : d.ati.entries) {
    const double pop = pop_value.at(e.entity_id);
    values.points.push_back({e.entity_id, pop, e.value});
    if (pop > 0 && e.value > 0) logs.points.push_back({e.entity_id, e.value, pop});
  }
  regime::SplitOptions opts;
  opts.k = c.cfg.k_lines;
  opts.outlier_ids.insert(c.cfg.exclude.begin(), c.cfg.exclude.end());
  const auto split = regime::two_line_split(values, opts);
  c.out.write("split.csv", regime::split_csv(values, split));

  const auto pairs = rank::pair_ranks(d.ati, d.pop);
  regime::ScatterSet rank_points{{}, "rank_ati", "rank_population"};
  std::string pcsv = "entity_id,rank_ati,rank_population\n";
  for (const auto& p : pairs.entries) {
    rank_points.points.push_back({p.entity_id, p.r_x, p.r_y});
    pcsv += p.entity_id + "," + fmt_real(p.r_x) + "," + fmt_real(p.r_y) + "\n";
  }
  c.out.write("rank_pairs.csv", pcsv);
  const auto axis = regime::inertia_axis(rank_points);
  const auto diff = rank::rank_diff_series(pairs);
  const auto power = regime::loglog_power_fit(logs);

  c.doc["split"] = regime::to_json(split);
  c.doc["inertia_axis"] = regime::to_json(axis);
  c.doc["power_fit"] = regime::to_json(power);
  c.doc["rank_difference"] = {{"summary", stats::to_json(diff.summary)},
                              {"fraction_nonpositive", json_real(diff.fraction_nonpositive)}};

  c.text += section("two-line split (y = ATI, x = population)") + regime::to_text(split);
  c.text += section("inertia axis (rank_population on rank_ati)");
  c.text += "intercept   " + fmt_real(axis.intercept) + " +- " + fmt_real(axis.intercept_se) + "\n";
  c.text += "slope       " + fmt_real(axis.slope) + " +- " + fmt_real(axis.slope_se) + "\n";
  c.text += "R2          " + fmt_real(axis.r_squared) + "\n";
  c.text += section("rank difference rank_population - rank_ati");
  c.text += "median      " + fmt_real(diff.summary.median) + "\n";
  c.text += "skewness    " + fmt_real(diff.summary.skewness) + "\n";
  c.text += "P(d <= 0)   " + fmt_real(diff.fraction_nonpositive) + "\n";
  c.text += section("log-log power fit (population on ATI)");
  c.text += "c           " + fmt_real(power.c) + "\nbeta        " + fmt_real(power.beta) + "\nR2          " +
            fmt_real(power.r_squared) + "\n";
}

void cmd_regime(Command_ctx& c) { regime_sections(c, paired(c.cfg)); }

void cmd_simulate(Command_ctx& c) {
  urnsim::UrnConfig uc;
  uc.n_urns = c.cfg.urns;
  uc.total_balls = c.cfg.balls;
  uc.a = c.cfg.attach;
  uc.k0 = c.cfg.k0;
  uc.capacity = c.cfg.capacity;
  uc.seed = c.cfg.seed;
  const auto summary = urnsim::simulate_replicates(uc, c.cfg.replicates);
  const auto first = urnsim::simulate_urns(uc, 0);
  c.out.write("occupancy.csv", urnsim::occupancy_csv(first));
  c.doc["config"] = urnsim::to_json(uc);
  c.doc["replicates"] = urnsim::to_json(summary);
  c.text += "urns        " + std::to_string(uc.n_urns) + "\nballs       " + std::to_string(uc.total_balls) +
            "\na           " + fmt_real(uc.a) + "\nk0          " + std::to_string(uc.k0) + "\nseed        " +
            std::to_string(uc.seed) + "\nreplicates  " + std::to_string(c.cfg.replicates) + "\n";
  c.text += section("sorted occupancy (mean, stddev)");
  std::string scsv = "position,mean,stddev\n";
  for (std::size_t i = 0; i < summary.mean.size(); ++i) {
    c.text += std::to_string(i + 1) + "  " + fmt_real(summary.mean[i]) + "  " + fmt_real(summary.stddev[i]) + "\n";
    scsv += std::to_string(i + 1) + "," + fmt_real(summary.mean[i]) + "," + fmt_real(summary.stddev[i]) + "\n";
  }
  c.out.write("sorted_occupancy.csv", scsv);

  if (uc.n_urns >= 4) {
    const auto series = urnsim::occupancy_series(first.occupancy);
    bool positive = true;
    for (const auto& e : series.entries) positive = positive && e.value > 0;
    if (positive) {
      try {
        const auto result = run_fit(series, c.cfg, {});
        c.doc["fit"] = fit::to_json(result);
        c.text += section("rank-size fit of replicate 0") + fit::to_text(result);
      } catch (const NumericError& e) {
        c.doc["fit"] = {{"error", e.what()}};
        c.text += section("rank-size fit of replicate 0") + "not fitted: " + e.what() + "\n";
      }
    }
  }
}

void cmd_report(Command_ctx& c) {
  auto panel = load_panel(c.cfg.input, c.cfg.merges, "input");
  auto pop = load_panel(c.cfg.population, "", "population");
  c.text += "rank-size report\n";
  c.text += "input       " + c.cfg.input + "\npopulation  " + c.cfg.population + "\n";
  if (!c.cfg.merges.empty()) c.text += "merges      " + c.cfg.merges + "\n";
  c.text += "entities    " + std::to_string(panel.records.size()) + "\n";

  // Descriptive statistics of the measured quantity.
  const auto cols = describe_panel(panel);
  c.doc["summary"] = describe_json(cols);
  c.text += section("summary statistics") + stats::summary_table(cols);

  // Regional structure, when region membership is present.
  const auto regions = ingest::aggregate_by_region(panel, pop);
  json rj = json::array();
  for (const auto& r : regions) rj.push_back(ingest::to_json(r));
  c.doc["regions"] = rj;
  const bool have_regions = regions.size() >= 3;
  std::string rcsv = "region,n_cities,n_inhabitants,ati_mean\n";
  for (const auto& r : regions)
    rcsv += r.region + "," + std::to_string(r.n_cities) + "," + fmt_real(r.n_inhabitants) + "," + fmt_real(r.ati_mean) + "\n";
  c.out.write("regions.csv", rcsv);
  if (have_regions) {
    std::vector<double> counts;
    for (const auto& r : regions) counts.push_back(static_cast<double>(r.n_cities));
    const auto s = stats::describe(counts);
    c.doc["region_counts"] = stats::to_json(s);
    c.text += section("cities per region") + stats::summary_table({{"N_c,r", s}});
  }

  // Rank correlations, city and region level.
  const auto x = average_series(panel, c.cfg.ties);
  const auto y = average_series(pop, c.cfg.ties);
  const auto city = corr::correlate(x, y);
  c.doc["correlation"] = corr::to_json(city);
  c.text += section("rank correlation, entities (ATI mean vs population)") + corr::to_text(city);
  const json expected = c.cfg.expected.empty() ? json::object() : load_expected(c.cfg.expected);
  if (expected.contains("correlation"))
    append_mismatches(c, corr::compare_expected(city, expected["correlation"]), "correlation_mismatches");
  if (have_regions) {
    std::vector<rank::Item> ri, pi;
    for (const auto& r : regions) {
      ri.push_back({r.region, r.region, r.ati_mean});
      pi.push_back({r.region, r.region, r.n_inhabitants});
    }
    const auto reg = corr::correlate(rank::rank_desc(ri, c.cfg.ties, "region ATI"),
                                     rank::rank_desc(pi, c.cfg.ties, "region population"));
    c.doc["region_correlation"] = corr::to_json(reg);
    c.text += section("rank correlation, regions") + corr::to_text(reg);
    if (expected.contains("region_correlation"))
      append_mismatches(c, corr::compare_expected(reg, expected["region_correlation"]), "region_correlation_mismatches");
  }
  if (panel.years.size() >= 2) {
    const auto m = corr::pairwise_matrix(panel, panel.years, true, c.cfg.ties);
    c.doc["pairwise"] = corr::to_json(m);
    c.text += section("year pairs: p (above) / q (below)") + m.pq_table('\t');
    c.text += section("year pairs: tau (above) / Z (below)") + m.tau_z_table('\t');
    if (expected.contains("pairwise"))
      append_mismatches(c, corr::compare_expected(m, expected["pairwise"]), "pairwise_mismatches");
  }

  // Rank-size fits.
  json fits = json::object();
  {
    const auto r = run_fit(x, c.cfg, {});
    fits["entities"] = fit::to_json(r);
    c.out.write("curve.csv", fit::curve_csv(x, r));
    c.text += section("rank-size fit, entities") + fit::to_text(r);
    if (c.cfg.drop_top > 0 && c.cfg.drop_top < x.size()) {
      std::vector<std::string> dropped;
      for (std::size_t i = 0; i < c.cfg.drop_top; ++i) dropped.push_back(x.entries[i].entity_id);
      const auto trimmed = fit::remove_top_outliers(x, c.cfg.drop_top);
      const auto rt = run_fit(trimmed, c.cfg, dropped);
      fits["entities_trimmed"] = fit::to_json(rt);
      c.text += section("rank-size fit, entities without the top " + std::to_string(c.cfg.drop_top)) + fit::to_text(rt);
    }
  }
  if (have_regions && regions.size() >= 4) {
    std::vector<rank::Item> items;
    for (const auto& r : regions) items.push_back({r.region, r.region, static_cast<double>(r.n_cities)});
    const auto counts = rank::rank_desc(items, c.cfg.ties, "cities per region");
    RunConfig region_cfg = c.cfg;
    region_cfg.A.reset();
    try {
      const auto r = run_fit(counts, region_cfg, {});
      fits["region_counts"] = fit::to_json(r);
      c.text += section("rank-size fit, cities per region") + fit::to_text(r);
    } catch (const NumericError& e) {
      fits["region_counts"] = {{"error", e.what()}};
      c.text += section("rank-size fit, cities per region") + "not fitted: " + e.what() + "\n";
    }
  }
  c.doc["fits"] = fits;

  // Scatter structure.
  regime_sections(c, {x, y});
}

}  // namespace

RunResult run(const RunConfig& cfg) {
  RunResult result;
  fs::path dir = cfg.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("RANKLAW_OUT_DIR");
    dir = env && *env ? fs::path(env) : fs::path(".");
  }
  std::optional<OutputDir> out;
  try {
    out.emplace(dir);
  } catch (const std::exception& e) {
    result.exit_code = 1;
    result.error = e.what();
    return result;
  }

  Command_ctx ctx{cfg, *out, json::object(), {}};
  try {
    switch (cfg.command) {
      case Command::ingest: cmd_ingest(ctx); break;
      case Command::describe: cmd_describe(ctx); break;
      case Command::rank: cmd_rank(ctx); break;
      case Command::corr: cmd_corr(ctx); break;
      case Command::fit: cmd_fit(ctx); break;
      case Command::regime: cmd_regime(ctx); break;
      case Command::simulate: cmd_simulate(ctx); break;
      case Command::report: cmd_report(ctx); break;
    }
    const std::string name = to_string(cfg.command);
    if (cfg.format == Format::machine) {
      ctx.doc["schema_version"] = kSchemaVersion;
      ctx.doc["command"] = name;
      out->write(name + ".json", dump(ctx.doc));
    } else {
      out->write(name + ".txt", ctx.text);
    }
    result.artifacts = out->written();
  } catch (const std::exception& e) {
    out->rollback();
    result.exit_code = 1;
    result.error = e.what();
  }
  return result;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Rank-size analysis: rank correlations, rank-size law fits, two-regime scatter splits, urn simulation"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string model = "lavalette3", scale = "log", ties = "lexical", format = "text";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out_dir, "Output directory (default $RANKLAW_OUT_DIR or .)");
    sub->add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "machine"}));
  };
  auto inputs = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.input, "Panel file (long or wide delimited text)");
    sub->add_option("--merges", cfg.merges, "Merge ledger applied to --input");
    sub->add_option("--ties", ties, "Tie rule")->check(CLI::IsMember({"lexical", "id", "average"}));
  };
  auto fitting = [&](CLI::App* sub) {
    sub->add_option("--model", model, "Rank-size law")->check(CLI::IsMember({"lavalette3", "powerlaw", "cutoff"}));
    sub->add_option("--A", cfg.A, "Fixed amplitude scale (default 10^floor(log10 max))");
    sub->add_option("--scale", scale, "Residual scale")->check(CLI::IsMember({"log", "linear"}));
    sub->add_option("--drop-top", cfg.drop_top, "Drop the K top-ranked entities before fitting");
  };

  auto* ingest_cmd = app.add_subcommand("ingest", "Parse, merge and aggregate a panel");
  common(ingest_cmd);
  inputs(ingest_cmd);
  ingest_cmd->add_option("--population", cfg.population, "Population panel for regional aggregation");

  auto* describe_cmd = app.add_subcommand("describe", "Summary statistics per year and for the average");
  common(describe_cmd);
  inputs(describe_cmd);

  auto* rank_cmd = app.add_subcommand("rank", "Rank entities by their average value");
  common(rank_cmd);
  inputs(rank_cmd);

  auto* corr_cmd = app.add_subcommand("corr", "Kendall, Spearman and Pearson correlations");
  common(corr_cmd);
  inputs(corr_cmd);
  corr_cmd->add_option("--population", cfg.population, "Second ranking criterion");
  corr_cmd->add_option("--expected", cfg.expected, "JSON of expected values to diff against");

  auto* fit_cmd = app.add_subcommand("fit", "Fit a rank-size law");
  common(fit_cmd);
  inputs(fit_cmd);
  fitting(fit_cmd);
  fit_cmd->add_option("--exclude", cfg.exclude, "Entity ids left out of the fit")->delimiter(',');

  auto* regime_cmd = app.add_subcommand("regime", "Two-regime scatter analysis");
  common(regime_cmd);
  inputs(regime_cmd);
  regime_cmd->add_option("--population", cfg.population, "Population panel")->required();
  regime_cmd->add_option("--k-lines", cfg.k_lines, "Number of lines")->check(CLI::IsMember({2, 3}));
  regime_cmd->add_option("--exclude", cfg.exclude, "Outlier ids left out of the split")->delimiter(',');

  auto* sim_cmd = app.add_subcommand("simulate", "Preferential-attachment urn process");
  common(sim_cmd);
  fitting(sim_cmd);
  sim_cmd->add_option("--urns", cfg.urns, "Number of urns");
  sim_cmd->add_option("--balls", cfg.balls, "Balls to place");
  sim_cmd->add_option("--a", cfg.attach, "Attachment offset a");
  sim_cmd->add_option("--k0", cfg.k0, "Initial balls per urn");
  sim_cmd->add_option("--capacity", cfg.capacity, "Per-urn capacity");
  sim_cmd->add_option("--replicates", cfg.replicates, "Independent replicates")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", cfg.seed, "Random seed");

  auto* report_cmd = app.add_subcommand("report", "Full pipeline report");
  common(report_cmd);
  inputs(report_cmd);
  fitting(report_cmd);
  report_cmd->add_option("--population", cfg.population, "Population panel")->required();
  report_cmd->add_option("--k-lines", cfg.k_lines, "Number of lines")->check(CLI::IsMember({2, 3}));
  report_cmd->add_option("--exclude", cfg.exclude, "Outlier ids left out of the split")->delimiter(',');
  report_cmd->add_option("--expected", cfg.expected, "JSON of expected values to diff against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    cfg.command = parse_command(app.get_subcommands().front()->get_name());
    cfg.model = fit::parse_model_kind(model);
    cfg.scale = fit::parse_scale(scale);
    cfg.ties = rank::parse_tiebreak(ties);
    cfg.format = format == "machine" ? Format::machine : Format::text;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  const auto result = run(cfg);
  if (result.exit_code != 0) {
    std::cerr << "error: " << result.error << "\n";
    return result.exit_code;
  }
  for (const auto& path : result.artifacts) std::cout << path << "\n";
  return 0;
}

}  // namespace ranklaw::cli
