#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ranklaw::stats {

/// Summary of one real series. Skewness and kurtosis use population central
/// moments (g1, and g2 = m4/m2^2 - 3); the standard deviation uses n-1. The
/// shape fields are NaN for a zero-variance series.
struct SummaryStats {
  std::size_t n = 0;
  double min = 0, max = 0, sum = 0;
  double mean = 0, median = 0, rms = 0;
  double std_dev = 0, variance = 0, std_err = 0;
  double skewness = 0;
  double kurtosis = 0;      // excess (Fisher)
  double kurtosis_raw = 0;  // Pearson, kurtosis + 3
  double mu_over_sigma = 0;
  double nonparam_skew = 0;  // 3 (mean - median) / sigma
};

SummaryStats describe(std::span<const double> series);

double nonparam_skew(double mean, double median, double std_dev);
double std_err(double std_dev, std::size_t n);

/// Standard normal quantile (Wichura's AS241, ~1e-16 relative).
double normal_quantile(double p);

struct QQPoint {
  double theoretical;
  double sample;
};

/// Normal QQ diagnostic: sorted standardized sample against Φ^{-1}((i-0.5)/n).
std::vector<QQPoint> qq_normal(std::span<const double> series);

nlohmann::json to_json(const SummaryStats& s);

/// Fixed-width text table with one column per labelled series, rows in the
/// order min, max, sum, count, mean, median, RMS, σ, variance, std. err.,
/// skewness, excess and raw kurtosis, μ/σ, 3(μ-m)/σ, after a header row.
std::string summary_table(const std::vector<std::pair<std::string, SummaryStats>>& columns);

}  // namespace ranklaw::stats
