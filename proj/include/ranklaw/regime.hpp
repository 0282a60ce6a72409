#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace ranklaw::regime {

struct ScatterPoint {
  std::string entity_id;
  double x = 0.0;
  double y = 0.0;
};

struct ScatterSet {
  std::vector<ScatterPoint> points;
  std::string x_label = "x";
  std::string y_label = "y";
};

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
  double intercept_se = 0.0;
  double slope_se = 0.0;
};

/// Ordinary least squares of y on x with coefficient standard errors.
LinearFit inertia_axis(const ScatterSet& points);

struct SplitOptions {
  int max_iter = 100;
  std::set<std::string> outlier_ids;
  int k = 2;  // number of lines, 2 or 3
};

/// Clustering of points onto k lines through the origin, y = s x. Class 1 has
/// the steepest line.
struct RegimeSplit {
  std::map<std::string, int> assignments;
  std::vector<double> slopes;  // slopes[c - 1] for class c, descending
  double overall_slope = 0.0;  // single line through all included points
  std::vector<std::string> outliers;
  double objective = 0.0;  // Σ squared orthogonal distance to the assigned line
  std::vector<double> objective_history;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;  // collinear input or an emptied class
};

/// Alternates nearest-line assignment (orthogonal distance) with a
/// per-class refit of the best line through the origin. Lines start at the
/// 10th/90th (10th/50th/90th for k = 3) percentiles of the point directions.
RegimeSplit two_line_split(const ScatterSet& points, const SplitOptions& options = {});

struct PowerFit {
  double c = 0.0;
  double beta = 0.0;
  double r_squared = 0.0;
};

/// y = c x^beta by least squares on (log x, log y).
PowerFit loglog_power_fit(const ScatterSet& points);

nlohmann::json to_json(const LinearFit& f);
nlohmann::json to_json(const RegimeSplit& s);
nlohmann::json to_json(const PowerFit& f);

/// "entity_id,x,y,class" rows; excluded outliers get class 0.
std::string split_csv(const ScatterSet& points, const RegimeSplit& split);
std::string to_text(const RegimeSplit& s);

}  // namespace ranklaw::regime
