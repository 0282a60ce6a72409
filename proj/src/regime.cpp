#include "ranklaw/regime.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ranklaw/error.hpp"
#include "ranklaw/format.hpp"

namespace ranklaw::regime {
namespace {

// Direction angle of the undirected line through the origin and (x, y),
// folded into (-pi/2, pi/2].
double fold_angle(double theta) {
  if (theta > std::numbers::pi / 2) theta -= std::numbers::pi;
  if (theta <= -std::numbers::pi / 2) theta += std::numbers::pi;
  return theta;
}

double sq_distance(const ScatterPoint& p, double theta) {
  const double d = p.x * std::sin(theta) - p.y * std::cos(theta);
  return d * d;
}

struct Moments {
  double sxx = 0, syy = 0, sxy = 0;
  void add(const ScatterPoint& p) {
    sxx += p.x * p.x;
    syy += p.y * p.y;
    sxy += p.x * p.y;
  }
  // Line through the origin minimizing the squared orthogonal distance: the
  // principal axis of the uncentered second-moment matrix.
  double principal_angle() const { return fold_angle(0.5 * std::atan2(2.0 * sxy, sxx - syy)); }
  double residual() const {
    const double tr = sxx + syy;
    const double disc = std::sqrt((sxx - syy) * (sxx - syy) + 4.0 * sxy * sxy);
    return std::max(0.0, 0.5 * (tr - disc));
  }
};

double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void check_finite(const ScatterSet& s) {
  for (const auto& p : s.points)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw InvalidArgument("regime", "non-finite coordinate for '" + p.entity_id + "'");
}

}  // namespace

LinearFit inertia_axis(const ScatterSet& s) {
  check_finite(s);
  const std::size_t n = s.points.size();
  if (n < 3) throw InvalidArgument("regime", "inertia axis needs at least 3 points");
  double mx = 0, my = 0;
  for (const auto& p : s.points) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : s.points) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
    syy += (p.y - my) * (p.y - my);
  }
  if (sxx == 0) throw NumericError("regime", "inertia axis undefined: x has zero variance");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (const auto& p : s.points) {
    const double r = p.y - f.intercept - f.slope * p.x;
    sse += r * r;
  }
  f.r_squared = syy > 0 ? 1.0 - sse / syy : 1.0;
  const double s2 = sse / static_cast<double>(n - 2);
  f.slope_se = std::sqrt(s2 / sxx);
  f.intercept_se = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
  return f;
}

RegimeSplit two_line_split(const ScatterSet& s, const SplitOptions& options) {
  check_finite(s);
  if (options.k != 2 && options.k != 3) throw InvalidArgument("regime", "k must be 2 or 3");
  const auto k = static_cast<std::size_t>(options.k);

  RegimeSplit out;
  std::vector<const ScatterPoint*> pts;
  for (const auto& p : s.points) {
    if (options.outlier_ids.contains(p.entity_id))
      out.outliers.push_back(p.entity_id);
    else
      pts.push_back(&p);
  }
  if (pts.size() < 2 * k)
    throw InvalidArgument("regime", "need at least " + std::to_string(2 * k) + " points after outlier exclusion");

  Moments all;
  for (const auto* p : pts) all.add(*p);
  const double overall_theta = all.principal_angle();
  out.overall_slope = std::tan(overall_theta);

  // Collinear through the origin: a single class carries everything.
  if (all.residual() <= 1e-12 * (all.sxx + all.syy)) {
    out.degenerate = true;
    out.converged = true;
    out.slopes = {out.overall_slope};
    out.objective = all.residual();
    out.objective_history = {out.objective};
    for (const auto* p : pts) out.assignments[p->entity_id] = 1;
    return out;
  }

  std::vector<double> angles;
  angles.reserve(pts.size());
  for (const auto* p : pts) angles.push_back(fold_angle(std::atan2(p->y, p->x)));
  std::sort(angles.begin(), angles.end());
  std::vector<double> theta;
  const std::vector<double> qs = k == 2 ? std::vector<double>{0.9, 0.1} : std::vector<double>{0.9, 0.5, 0.1};
  for (double q : qs) theta.push_back(percentile(angles, q));
  if (theta.front() == theta.back()) {
    theta.front() = angles.back();
    theta.back() = angles.front();
  }

  std::vector<int> label(pts.size(), -1);
  auto objective_of = [&](const std::vector<int>& lab) {
    double obj = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) obj += sq_distance(*pts[i], theta[static_cast<std::size_t>(lab[i])]);
    return obj;
  };

  for (out.iterations = 0; out.iterations < options.max_iter; ++out.iterations) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      int best = 0;
      double best_d = sq_distance(*pts[i], theta[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = sq_distance(*pts[i], theta[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (label[i] != best) {
        label[i] = best;
        changed = true;
      }
    }
    if (!changed) {
      out.converged = true;
      break;
    }
    std::vector<Moments> m(k);
    for (std::size_t i = 0; i < pts.size(); ++i) m[static_cast<std::size_t>(label[i])].add(*pts[i]);
    for (std::size_t c = 0; c < k; ++c)
      if (m[c].sxx + m[c].syy > 0) theta[c] = m[c].principal_angle();
    out.objective_history.push_back(objective_of(label));
  }
  out.objective = objective_of(label);

  // Relabel so class 1 is the steepest line.
  std::vector<std::size_t> order(k);
  for (std::size_t c = 0; c < k; ++c) order[c] = c;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return theta[a] > theta[b]; });
  std::vector<int> new_label(k);
  for (std::size_t rank = 0; rank < k; ++rank) new_label[order[rank]] = static_cast<int>(rank) + 1;
  std::vector<std::size_t> class_size(k, 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int c = new_label[static_cast<std::size_t>(label[i])];
    out.assignments[pts[i]->entity_id] = c;
    ++class_size[static_cast<std::size_t>(c - 1)];
  }
  for (std::size_t rank = 0; rank < k; ++rank) out.slopes.push_back(std::tan(theta[order[rank]]));
  out.degenerate = std::any_of(class_size.begin(), class_size.end(), [](std::size_t n) { return n == 0; });
  return out;
}

PowerFit loglog_power_fit(const ScatterSet& s) {
  check_finite(s);
  if (s.points.size() < 2) throw InvalidArgument("regime", "power fit needs at least 2 points");
  ScatterSet logs;
  for (const auto& p : s.points) {
    if (!(p.x > 0) || !(p.y > 0))
      throw InvalidArgument("regime", "non-positive coordinate for '" + p.entity_id + "' in log-log fit");
    logs.points.push_back({p.entity_id, std::log(p.x), std::log(p.y)});
  }
  double mx = 0, my = 0;
  for (const auto& p : logs.points) {
    mx += p.x;
    my += p.y;
  }
  const double n = static_cast<double>(logs.points.size());
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : logs.points) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
    syy += (p.y - my) * (p.y - my);
  }
  if (sxx == 0) throw NumericError("regime", "power fit undefined: log x has zero variance");
  PowerFit f;
  f.beta = sxy / sxx;
  f.c = std::exp(my - f.beta * mx);
  f.r_squared = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

nlohmann::json to_json(const LinearFit& f) {
  return {{"intercept", json_real(f.intercept)},
          {"slope", json_real(f.slope)},
          {"r_squared", json_real(f.r_squared)},
          {"intercept_se", json_real(f.intercept_se)},
          {"slope_se", json_real(f.slope_se)}};
}

nlohmann::json to_json(const RegimeSplit& s) {
  nlohmann::json slopes = nlohmann::json::array();
  for (double v : s.slopes) slopes.push_back(json_real(v));
  nlohmann::json history = nlohmann::json::array();
  for (double v : s.objective_history) history.push_back(json_real(v));
  std::map<int, std::size_t> sizes;
  for (const auto& [_, c] : s.assignments) ++sizes[c];
  nlohmann::json class_sizes = nlohmann::json::object();
  for (const auto& [c, n] : sizes) class_sizes[std::to_string(c)] = n;
  return {{"slopes", slopes},
          {"overall_slope", json_real(s.overall_slope)},
          {"outliers", s.outliers},
          {"objective", json_real(s.objective)},
          {"objective_history", history},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"degenerate", s.degenerate},
          {"class_sizes", class_sizes}};
}

nlohmann::json to_json(const PowerFit& f) {
  return {{"c", json_real(f.c)}, {"beta", json_real(f.beta)}, {"r_squared", json_real(f.r_squared)}};
}

std::string split_csv(const ScatterSet& points, const RegimeSplit& split) {
  std::string out = "entity_id,x,y,class\n";
  for (const auto& p : points.points) {
    auto it = split.assignments.find(p.entity_id);
    const int c = it == split.assignments.end() ? 0 : it->second;
    out += p.entity_id + "," + fmt_real(p.x) + "," + fmt_real(p.y) + "," + std::to_string(c) + "\n";
  }
  return out;
}

std::string to_text(const RegimeSplit& s) {
  std::string out;
  for (std::size_t c = 0; c < s.slopes.size(); ++c)
    out += "line " + std::to_string(c + 1) + "      y = " + fmt_real(s.slopes[c]) + " x\n";
  out += "overall     y = " + fmt_real(s.overall_slope) + " x\n";
  out += "objective   " + fmt_real(s.objective) + "\n";
  out += "iterations  " + std::to_string(s.iterations) + (s.converged ? " (converged)" : " (max_iter)") + "\n";
  if (s.degenerate) out += "degenerate  yes\n";
  if (!s.outliers.empty()) {
    out += "outliers   ";
    for (const auto& id : s.outliers) out += " " + id;
    out += "\n";
  }
  return out;
}

}  // namespace ranklaw::regime
