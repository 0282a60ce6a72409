#include "ranklaw/corr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "ranklaw/error.hpp"
#include "ranklaw/format.hpp"

namespace ranklaw::corr {
namespace {

std::int64_t pairs_in(std::int64_t t) { return t * (t - 1) / 2; }

// Σ t(t-1)/2 over runs of equal keys in an already-sorted sequence.
template <class Eq>
std::int64_t tied_pairs(std::size_t n, Eq equal_to_prev) {
  std::int64_t total = 0, run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (equal_to_prev(i)) {
      ++run;
    } else {
      total += pairs_in(run);
      run = 1;
    }
  }
  return total + pairs_in(run);
}

// Sorts v ascending, returning the number of pairs i < j with v[i] > v[j].
std::int64_t merge_count(std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> buf(n);
  std::int64_t swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          swaps += static_cast<std::int64_t>(mid - i);
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
    }
    v.swap(buf);
  }
  return swaps;
}

void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("corr", "series lengths differ");
}

}  // namespace

KendallCounts kendall_counts(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const std::size_t n = x.size();
  KendallCounts c;
  c.n = static_cast<std::int64_t>(n);
  if (n < 2) return c;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });

  const std::int64_t n1 = tied_pairs(n, [&](std::size_t i) { return x[order[i]] == x[order[i - 1]]; });
  const std::int64_t n3 = tied_pairs(n, [&](std::size_t i) {
    return x[order[i]] == x[order[i - 1]] && y[order[i]] == y[order[i - 1]];
  });

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  // Pairs tied in x are already ascending in y, so every inversion is strictly
  // discordant.
  c.q = merge_count(ys);
  const std::int64_t n2 = tied_pairs(n, [&](std::size_t i) { return ys[i] == ys[i - 1]; });

  c.ties_xy = n3;
  c.ties_x = n1 - n3;
  c.ties_y = n2 - n3;
  c.p = c.total_pairs() - n1 - n2 + n3 - c.q;
  return c;
}

KendallCounts kendall_counts(const rank::RankPairs& pairs) {
  const auto x = pairs.x();
  const auto y = pairs.y();
  return kendall_counts(x, y);
}

KendallCounts kendall_counts_bruteforce(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  KendallCounts c;
  c.n = static_cast<std::int64_t>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) {
        ++c.ties_xy;
      } else if (dx == 0) {
        ++c.ties_x;
      } else if (dy == 0) {
        ++c.ties_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++c.p;
      } else {
        ++c.q;
      }
    }
  }
  return c;
}

double kendall_tau(std::int64_t p, std::int64_t q) {
  if (p + q <= 0) throw NumericError("corr", "kendall tau undefined: no untied pairs (p + q = 0)");
  return static_cast<double>(p - q) / static_cast<double>(p + q);
}

Tau kendall_tau(const KendallCounts& c) {
  Tau t;
  t.tau_a = kendall_tau(c.p, c.q);
  const double n0 = static_cast<double>(c.total_pairs());
  const double n1 = static_cast<double>(c.ties_x + c.ties_xy);
  const double n2 = static_cast<double>(c.ties_y + c.ties_xy);
  t.tau_b = static_cast<double>(c.p - c.q) / std::sqrt((n0 - n1) * (n0 - n2));
  return t;
}

ZScore z_score(double tau, std::int64_t n) {
  if (n < 3) throw InvalidArgument("corr", "z_score needs n >= 3");
  const double nn = static_cast<double>(n);
  const double sigma = std::sqrt(2.0 * (2.0 * nn + 5.0) / (9.0 * nn * (nn - 1.0)));
  return {sigma, tau / sigma};
}

double pearson_pi(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  if (x.size() < 2) throw InvalidArgument("corr", "pearson needs at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericError("corr", "correlation undefined for a zero-variance series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman_rho(const rank::RankPairs& pairs) {
  const auto x = pairs.x();
  const auto y = pairs.y();
  return pearson_pi(x, y);
}

CorrelationReport correlate(const rank::RankedSeries& x, const rank::RankedSeries& y) {
  const auto pairs = rank::pair_ranks(x, y);
  CorrelationReport r;
  r.x_label = x.criterion;
  r.y_label = y.criterion;
  r.counts = kendall_counts(pairs);
  const auto tau = kendall_tau(r.counts);
  r.tau_a = tau.tau_a;
  r.tau_b = tau.tau_b;
  if (r.counts.n >= 3) {
    const auto z = z_score(r.tau_a, r.counts.n);
    r.sigma_tau = z.sigma_tau;
    r.z = z.z;
  } else {
    r.sigma_tau = r.z = std::nan("");
  }
  r.rho = spearman_rho(pairs);

  std::unordered_map<std::string, double> y_value;
  for (const auto& e : y.entries) y_value.emplace(e.entity_id, e.value);
  std::vector<double> xv, yv;
  xv.reserve(x.size());
  yv.reserve(x.size());
  for (const auto& e : x.entries) {
    xv.push_back(e.value);
    yv.push_back(y_value.at(e.entity_id));
  }
  r.pi = pearson_pi(xv, yv);
  return r;
}

PairwiseMatrix pairwise_matrix(const ingest::Panel& panel, const std::vector<int>& window, bool include_average,
                               rank::TieBreak rule) {
  if (window.size() + (include_average ? 1 : 0) < 2) throw InvalidArgument("corr", "pairwise matrix needs two columns");
  std::vector<std::vector<double>> columns;
  PairwiseMatrix m;
  for (int year : window) {
    if (!std::binary_search(panel.years.begin(), panel.years.end(), year))
      throw InvalidArgument("corr", "year " + std::to_string(year) + " not in panel");
    std::vector<double> col;
    col.reserve(panel.records.size());
    for (const auto& r : panel.records) {
      auto v = r.value(year);
      if (!v) throw DataError("corr", "missing value for '" + r.entity_id + "' in " + std::to_string(year));
      col.push_back(*v);
    }
    columns.push_back(std::move(col));
    m.labels.push_back(std::to_string(year));
  }
  if (include_average) {
    const auto avg = ingest::average_over_years(panel, window);
    std::vector<double> col;
    col.reserve(panel.records.size());
    for (const auto& r : panel.records) col.push_back(avg.at(r.entity_id));
    columns.push_back(std::move(col));
    m.labels.push_back("avg");
  }

  // Rank each column, keeping panel record order.
  std::vector<std::vector<double>> ranks;
  for (const auto& col : columns) {
    std::vector<rank::Item> items;
    items.reserve(col.size());
    for (std::size_t i = 0; i < col.size(); ++i)
      items.push_back({panel.records[i].entity_id, panel.records[i].name, col[i]});
    const auto series = rank::rank_desc(items, rule);
    std::unordered_map<std::string, double> by_id;
    for (const auto& e : series.entries) by_id.emplace(e.entity_id, e.rank);
    std::vector<double> rv;
    rv.reserve(col.size());
    for (const auto& r : panel.records) rv.push_back(by_id.at(r.entity_id));
    ranks.push_back(std::move(rv));
  }

  const std::size_t k = columns.size();
  m.counts.assign(k, std::vector<KendallCounts>(k));
  m.tau.assign(k, std::vector<double>(k, 1.0));
  m.z.assign(k, std::vector<double>(k, std::nan("")));
  for (std::size_t i = 0; i < k; ++i) {
    m.counts[i][i] = kendall_counts(ranks[i], ranks[i]);
    for (std::size_t j = i + 1; j < k; ++j) {
      const auto c = kendall_counts(ranks[i], ranks[j]);
      m.counts[i][j] = m.counts[j][i] = c;
      const double tau = kendall_tau(c.p, c.q);
      m.tau[i][j] = m.tau[j][i] = tau;
      if (c.n >= 3) m.z[i][j] = m.z[j][i] = z_score(tau, c.n).z;
    }
  }
  return m;
}

namespace {

template <class Cell>
std::string square_table(const std::vector<std::string>& labels, char delim, const std::string& corner, Cell cell) {
  std::string out = corner;
  for (const auto& l : labels) out += delim + l;
  out += '\n';
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += labels[i];
    for (std::size_t j = 0; j < labels.size(); ++j) out += delim + (i == j ? std::string("-") : cell(i, j));
    out += '\n';
  }
  return out;
}

}  // namespace

std::string PairwiseMatrix::pq_table(char delim) const {
  return square_table(labels, delim, "q\\p", [&](std::size_t i, std::size_t j) {
    return std::to_string(i < j ? counts[i][j].p : counts[i][j].q);
  });
}

std::string PairwiseMatrix::tau_z_table(char delim) const {
  return square_table(labels, delim, "Z\\tau",
                      [&](std::size_t i, std::size_t j) { return fmt_real(i < j ? tau[i][j] : z[i][j]); });
}

nlohmann::json to_json(const KendallCounts& c) {
  return {{"n", c.n},           {"p", c.p},           {"q", c.q},
          {"ties_x", c.ties_x}, {"ties_y", c.ties_y}, {"ties_xy", c.ties_xy},
          {"p_plus_q", c.p + c.q}, {"p_minus_q", c.p - c.q}};
}

nlohmann::json to_json(const CorrelationReport& r) {
  return {{"x", r.x_label},
          {"y", r.y_label},
          {"counts", to_json(r.counts)},
          {"tau_a", json_real(r.tau_a)},
          {"tau_b", json_real(r.tau_b)},
          {"sigma_tau", json_real(r.sigma_tau)},
          {"z", json_real(r.z)},
          {"spearman_rho", json_real(r.rho)},
          {"pearson_pi", json_real(r.pi)},
          {"pearson_note",
           "standard covariance / (sigma_x sigma_y) definition; the sum-form printed in some references "
           "is not dimensionally consistent and is not used"}};
}

nlohmann::json to_json(const PairwiseMatrix& m) {
  const std::size_t k = m.labels.size();
  nlohmann::json pq = nlohmann::json::array(), tz = nlohmann::json::array();
  for (std::size_t i = 0; i < k; ++i) {
    nlohmann::json pq_row = nlohmann::json::array(), tz_row = nlohmann::json::array();
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) {
        pq_row.push_back(nullptr);
        tz_row.push_back(nullptr);
      } else {
        pq_row.push_back(i < j ? m.counts[i][j].p : m.counts[i][j].q);
        tz_row.push_back(json_real(i < j ? m.tau[i][j] : m.z[i][j]));
      }
    }
    pq.push_back(pq_row);
    tz.push_back(tz_row);
  }
  return {{"labels", m.labels}, {"pq", pq}, {"tau_z", tz}};
}

std::string to_text(const CorrelationReport& r) {
  std::string out;
  auto line = [&](const std::string& label, const std::string& value) {
    out += label;
    out.append(label.size() < 18 ? 18 - label.size() : 1, ' ');
    out += value + "\n";
  };
  line("x", r.x_label);
  line("y", r.y_label);
  line("n", std::to_string(r.counts.n));
  line("p+q", std::to_string(r.counts.p + r.counts.q));
  line("p-q", std::to_string(r.counts.p - r.counts.q));
  line("p", std::to_string(r.counts.p));
  line("q", std::to_string(r.counts.q));
  line("ties (x,y,xy)", std::to_string(r.counts.ties_x) + "," + std::to_string(r.counts.ties_y) + "," +
                            std::to_string(r.counts.ties_xy));
  line("Kendall tau", fmt_real(r.tau_a));
  line("Kendall tau-b", fmt_real(r.tau_b));
  line("sigma_tau", fmt_real(r.sigma_tau));
  line("Z", fmt_real(r.z));
  line("Spearman rho", fmt_real(r.rho));
  line("Pearson Pi", fmt_real(r.pi));
  out += "note: Pearson Pi uses the covariance / (sigma_x sigma_y) definition\n";
  return out;
}

std::vector<Mismatch> compare_expected(const CorrelationReport& r, const nlohmann::json& expected, double tol) {
  std::vector<Mismatch> out;
  auto real = [&](const char* key, double actual) {
    if (expected.contains(key) && expected[key].is_number()) {
      const double e = expected[key].get<double>();
      if (!(std::fabs(e - actual) <= tol)) out.push_back({key, e, actual, tol});
    }
  };
  auto exact = [&](const char* key, std::int64_t actual) {
    if (expected.contains(key) && expected[key].is_number()) {
      const auto e = expected[key].get<std::int64_t>();
      if (e != actual) out.push_back({key, static_cast<double>(e), static_cast<double>(actual), 0.0});
    }
  };
  real("tau", r.tau_a);
  real("rho", r.rho);
  real("pi", r.pi);
  exact("p", r.counts.p);
  exact("q", r.counts.q);
  exact("p_plus_q", r.counts.p + r.counts.q);
  exact("p_minus_q", r.counts.p - r.counts.q);
  return out;
}

std::vector<Mismatch> compare_expected(const PairwiseMatrix& m, const nlohmann::json& expected, double tol) {
  std::vector<Mismatch> out;
  const std::size_t k = m.labels.size();
  auto cell_name = [&](const char* table, std::size_t i, std::size_t j) {
    return std::string(table) + "[" + m.labels[i] + "][" + m.labels[j] + "]";
  };
  for (const char* table : {"pq", "tau_z"}) {
    if (!expected.contains(table)) continue;
    const auto& t = expected[table];
    if (t.size() != k) {
      out.push_back({std::string(table) + ".size", static_cast<double>(t.size()), static_cast<double>(k), 0.0});
      continue;
    }
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        if (i == j || j >= t[i].size() || !t[i][j].is_number()) continue;
        const double e = t[i][j].get<double>();
        if (std::string(table) == "pq") {
          const auto actual = i < j ? m.counts[i][j].p : m.counts[i][j].q;
          if (t[i][j].get<std::int64_t>() != actual)
            out.push_back({cell_name(table, i, j), e, static_cast<double>(actual), 0.0});
        } else if (i < j) {
          if (!(std::fabs(e - m.tau[i][j]) <= tol)) out.push_back({cell_name(table, i, j), e, m.tau[i][j], tol});
        } else {
          // Z scales tau by 1/sigma_tau; hold it to the same tolerance relative to that scale.
          const double z_tol = tol * std::fabs(m.z[i][j] / m.tau[i][j]);
          if (!(std::fabs(e - m.z[i][j]) <= z_tol)) out.push_back({cell_name(table, i, j), e, m.z[i][j], z_tol});
        }
      }
    }
  }
  return out;
}

}  // namespace ranklaw::corr
