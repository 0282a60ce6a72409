#include "ranklaw/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ranklaw/error.hpp"
#include "ranklaw/format.hpp"

namespace ranklaw::stats {

double nonparam_skew(double mean, double median, double std_dev) { return 3.0 * (mean - median) / std_dev; }

double std_err(double std_dev, std::size_t n) { return std_dev / std::sqrt(static_cast<double>(n)); }

SummaryStats describe(std::span<const double> series) {
  if (series.size() < 2) throw InvalidArgument("stats", "describe needs at least 2 values");
  SummaryStats s;
  s.n = series.size();
  const double n = static_cast<double>(s.n);

  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  const std::size_t mid = s.n / 2;
  s.median = s.n % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

  double sum = 0.0, sum_sq = 0.0;
  for (double x : series) {
    sum += x;
    sum_sq += x * x;
  }
  s.sum = sum;
  s.mean = sum / n;
  s.rms = std::sqrt(sum_sq / n);

  // Central moments from the mean, not from the raw power sums.
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : series) {
    const double d = x - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  s.variance = m2 / (n - 1.0);
  s.std_dev = std::sqrt(s.variance);
  s.std_err = std_err(s.std_dev, s.n);
  m2 /= n;
  m3 /= n;
  m4 /= n;

  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis_raw = m4 / (m2 * m2);
    s.kurtosis = s.kurtosis_raw - 3.0;
    s.mu_over_sigma = s.mean / s.std_dev;
    s.nonparam_skew = nonparam_skew(s.mean, s.median, s.std_dev);
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.skewness = s.kurtosis = s.kurtosis_raw = s.mu_over_sigma = s.nonparam_skew = nan;
  }
  return s;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw InvalidArgument("stats", "normal_quantile argument outside [0, 1]");
  }
  // Wichura (1988), Algorithm AS241 PPND16.
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r +
                45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) * r +
                21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                 1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
              4.6303378461565452959) * r + 1.42343711074968357734) /
            (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                 0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
              2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                 0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
              5.4637849111641143699) * r + 6.6579046435011037772) /
            (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                 7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
              0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

std::vector<QQPoint> qq_normal(std::span<const double> series) {
  if (series.size() < 2) throw InvalidArgument("stats", "qq_normal needs at least 2 values");
  const auto s = describe(series);
  if (!(s.std_dev > 0.0)) throw NumericError("stats", "qq_normal of a zero-variance series");
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<QQPoint> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double p = (static_cast<double>(i) + 0.5) / n;
    out.push_back({normal_quantile(p), (sorted[i] - s.mean) / s.std_dev});
  }
  return out;
}

nlohmann::json to_json(const SummaryStats& s) {
  return {{"n", s.n},
          {"min", json_real(s.min)},
          {"max", json_real(s.max)},
          {"sum", json_real(s.sum)},
          {"mean", json_real(s.mean)},
          {"median", json_real(s.median)},
          {"rms", json_real(s.rms)},
          {"std_dev", json_real(s.std_dev)},
          {"variance", json_real(s.variance)},
          {"std_err", json_real(s.std_err)},
          {"skewness", json_real(s.skewness)},
          {"kurtosis_excess", json_real(s.kurtosis)},
          {"kurtosis_raw", json_real(s.kurtosis_raw)},
          {"mu_over_sigma", json_real(s.mu_over_sigma)},
          {"nonparam_skew", json_real(s.nonparam_skew)}};
}

std::string summary_table(const std::vector<std::pair<std::string, SummaryStats>>& columns) {
  struct Row {
    const char* label;
    double SummaryStats::*field;
  };
  static const Row rows[] = {
      {"min.", &SummaryStats::min},           {"Max.", &SummaryStats::max},
      {"Sum", &SummaryStats::sum},            {"mean (mu)", &SummaryStats::mean},
      {"median (m)", &SummaryStats::median},  {"RMS", &SummaryStats::rms},
      {"Std. Dev. (sigma)", &SummaryStats::std_dev}, {"Var.", &SummaryStats::variance},
      {"Std. Err.", &SummaryStats::std_err},  {"Skewness", &SummaryStats::skewness},
      {"Kurtosis (excess)", &SummaryStats::kurtosis}, {"Kurtosis (raw)", &SummaryStats::kurtosis_raw},
      {"mu/sigma", &SummaryStats::mu_over_sigma}, {"3(mu-m)/sigma", &SummaryStats::nonparam_skew},
  };
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-20s", "");
  out += buf;
  for (const auto& [label, s] : columns) {
    std::snprintf(buf, sizeof buf, " %20s", label.c_str());
    out += buf;
  }
  out += '\n';
  auto emit = [&](const char* label, auto get) {
    std::snprintf(buf, sizeof buf, "%-20s", label);
    out += buf;
    for (const auto& [_, s] : columns) {
      std::snprintf(buf, sizeof buf, " %20s", get(s).c_str());
      out += buf;
    }
    out += '\n';
  };
  emit("Max. range (n)", [](const SummaryStats& s) { return std::to_string(s.n); });
  for (const auto& row : rows) emit(row.label, [&](const SummaryStats& s) { return fmt_real(s.*row.field); });
  return out;
}

}  // namespace ranklaw::stats
