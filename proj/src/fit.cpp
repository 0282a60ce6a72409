#include "ranklaw/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "ranklaw/error.hpp"
#include "ranklaw/format.hpp"

namespace ranklaw::fit {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Line {
  double intercept;
  double slope;
};

// Ordinary least squares v = intercept + slope * u; nullopt when u is constant.
std::optional<Line> ols(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() < 2) return std::nullopt;
  const double n = static_cast<double>(u.size());
  double mu = 0, mv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= n;
  mv /= n;
  double suu = 0, suv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    suv += (u[i] - mu) * (v[i] - mv);
  }
  if (suu <= 0) return std::nullopt;
  const double slope = suv / suu;
  return Line{mv - slope * mu, slope};
}

double r_squared_of(const std::vector<double>& obs, const std::vector<double>& pred) {
  double mean = 0;
  for (double v : obs) mean += v;
  mean /= static_cast<double>(obs.size());
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    ss_res += (obs[i] - pred[i]) * (obs[i] - pred[i]);
    ss_tot += (obs[i] - mean) * (obs[i] - mean);
  }
  if (ss_tot == 0) throw NumericError("fit", "R^2 undefined: observations have zero total sum of squares");
  return 1.0 - ss_res / ss_tot;
}

// Residuals and Jacobian of the fitted curve on one scale.
struct Problem {
  const rank::RankedSeries& series;
  RankSizeModel model;
  Scale scale;
  std::size_t p;

  bool residuals(const std::array<double, 3>& theta, Eigen::VectorXd& r) const {
    RankSizeModel m = model;
    m.params = theta;
    const std::size_t n = series.size();
    r.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const double f = model_eval(m, series.entries[i].rank);
      const double y = series.entries[i].value;
      double res;
      if (scale == Scale::log) {
        if (!(f > 0)) return false;
        res = std::log(y) - std::log(f);
      } else {
        res = y - f;
      }
      if (!std::isfinite(res)) return false;
      r[static_cast<Eigen::Index>(i)] = res;
    }
    return true;
  }

  Eigen::MatrixXd jacobian(const std::array<double, 3>& theta) const {
    RankSizeModel m = model;
    m.params = theta;
    const std::size_t n = series.size();
    Eigen::MatrixXd J(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < n; ++i) {
      const double r = series.entries[i].rank;
      const auto g = model_gradient(m, r);
      const double f = scale == Scale::log ? model_eval(m, r) : 1.0;
      for (std::size_t k = 0; k < p; ++k) J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = g[k] / f;
    }
    return J;
  }
};

double condition_number(const Eigen::MatrixXd& J) {
  Eigen::MatrixXd scaled = J;
  for (Eigen::Index k = 0; k < J.cols(); ++k) {
    const double norm = J.col(k).norm();
    if (norm == 0) return std::numeric_limits<double>::infinity();
    scaled.col(k) /= norm;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
  const auto& sv = svd.singularValues();
  const double smin = sv[sv.size() - 1];
  return smin > 0 ? sv[0] / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

ModelKind parse_model_kind(const std::string& s) {
  if (s == "lavalette3") return ModelKind::lavalette3;
  if (s == "powerlaw") return ModelKind::powerlaw;
  if (s == "cutoff" || s == "powerlaw_cutoff") return ModelKind::powerlaw_cutoff;
  throw InvalidArgument("fit", "unknown model '" + s + "'");
}

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::lavalette3: return "lavalette3";
    case ModelKind::powerlaw: return "powerlaw";
    case ModelKind::powerlaw_cutoff: return "powerlaw_cutoff";
  }
  return "?";
}

std::size_t param_count(ModelKind k) { return k == ModelKind::powerlaw ? 2 : 3; }

std::vector<std::string> param_names(ModelKind k) {
  switch (k) {
    case ModelKind::lavalette3: return {"m1", "m2", "m3"};
    case ModelKind::powerlaw: return {"c", "beta"};
    case ModelKind::powerlaw_cutoff: return {"h", "alpha", "lambda"};
  }
  return {};
}

Scale parse_scale(const std::string& s) {
  if (s == "log") return Scale::log;
  if (s == "linear") return Scale::linear;
  throw InvalidArgument("fit", "unknown scale '" + s + "'");
}

std::string to_string(Scale s) { return s == Scale::log ? "log" : "linear"; }

RankSizeModel RankSizeModel::lavalette3(double A, double N, double m1, double m2, double m3) {
  return {ModelKind::lavalette3, A, N, {m1, m2, m3}};
}

RankSizeModel RankSizeModel::powerlaw(double A, double N, double c, double beta) {
  return {ModelKind::powerlaw, A, N, {c, beta, 0.0}};
}

RankSizeModel RankSizeModel::powerlaw_cutoff(double A, double N, double h, double alpha, double lambda) {
  return {ModelKind::powerlaw_cutoff, A, N, {h, alpha, lambda}};
}

double model_eval(const RankSizeModel& m, double r) {
  if (!(r >= 1.0 && r <= m.N)) throw InvalidArgument("fit", "rank " + fmt_real(r) + " outside [1, N]");
  const auto& t = m.params;
  switch (m.kind) {
    case ModelKind::lavalette3: return m.A * t[0] * std::pow(r, -t[1]) * std::pow(m.N - r + 1.0, t[2]);
    case ModelKind::powerlaw: return m.A * t[0] * std::pow(r, -t[1]);
    case ModelKind::powerlaw_cutoff: return m.A * t[0] * std::pow(r, -t[1]) * std::exp(-t[2] * r);
  }
  return kNaN;
}

std::array<double, 3> model_gradient(const RankSizeModel& m, double r) {
  const auto& t = m.params;
  const double log_r = std::log(r);
  switch (m.kind) {
    case ModelKind::lavalette3: {
      const double tail = m.N - r + 1.0;
      const double shape = std::pow(r, -t[1]) * std::pow(tail, t[2]);
      const double f = m.A * t[0] * shape;
      return {m.A * shape, -f * log_r, f * std::log(tail)};
    }
    case ModelKind::powerlaw: {
      const double shape = std::pow(r, -t[1]);
      return {m.A * shape, -m.A * t[0] * shape * log_r, 0.0};
    }
    case ModelKind::powerlaw_cutoff: {
      const double shape = std::pow(r, -t[1]) * std::exp(-t[2] * r);
      const double f = m.A * t[0] * shape;
      return {m.A * shape, -f * log_r, -f * r};
    }
  }
  return {};
}

double default_amplitude(const rank::RankedSeries& series) {
  double max_y = 0;
  for (const auto& e : series.entries) max_y = std::max(max_y, e.value);
  if (!(max_y > 0)) return 1.0;
  return std::pow(10.0, std::floor(std::log10(max_y)));
}

std::array<double, 3> initial_params(const rank::RankedSeries& series, ModelKind kind, double A, double N) {
  std::vector<double> log_r, log_y, log_tail;
  std::vector<double> ranks;
  for (const auto& e : series.entries) {
    if (!(e.value > 0)) continue;
    ranks.push_back(e.rank);
    log_r.push_back(std::log(e.rank));
    log_y.push_back(std::log(e.value));
    log_tail.push_back(std::log(N - e.rank + 1.0));
  }
  if (log_y.empty()) throw InvalidArgument("fit", "no positive values to initialize from");

  auto subset = [&](auto keep, const std::vector<double>& u, const std::vector<double>& v) {
    std::pair<std::vector<double>, std::vector<double>> out;
    for (std::size_t i = 0; i < ranks.size(); ++i)
      if (keep(ranks[i])) {
        out.first.push_back(u[i]);
        out.second.push_back(v[i]);
      }
    return out;
  };

  double slope_exp = 1.0;
  if (kind == ModelKind::lavalette3) {
    auto [u, v] = subset([&](double r) { return r >= 0.25 * N && r <= 0.75 * N; }, log_r, log_y);
    auto mid = ols(u, v);
    if (!mid) mid = ols(log_r, log_y);
    if (mid) slope_exp = -mid->slope;
  } else if (auto all = ols(log_r, log_y)) {
    slope_exp = -all->slope;
  }

  double tail_exp = 0.0;
  if (kind == ModelKind::lavalette3) {
    std::vector<double> w(log_y.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = log_y[i] + slope_exp * log_r[i];
    auto [u, v] = subset([&](double r) { return r > 0.75 * N; }, log_tail, w);
    if (auto tail = ols(u, v)) tail_exp = tail->slope;
  }

  double mean_log_amp = 0.0;
  for (std::size_t i = 0; i < log_y.size(); ++i) mean_log_amp += log_y[i] + slope_exp * log_r[i] - tail_exp * log_tail[i];
  mean_log_amp /= static_cast<double>(log_y.size());
  const double amp = std::exp(mean_log_amp) / A;

  switch (kind) {
    case ModelKind::lavalette3: return {amp, slope_exp, tail_exp};
    case ModelKind::powerlaw: return {amp, slope_exp, 0.0};
    case ModelKind::powerlaw_cutoff: return {amp, slope_exp, 0.0};
  }
  return {};
}

FitResult fit_model(const rank::RankedSeries& series, ModelKind kind, double A, const FitOptions& options) {
  const std::size_t p = param_count(kind);
  const std::size_t n = series.size();
  if (n < p + 1)
    throw InvalidArgument("fit", "need at least " + std::to_string(p + 1) + " points, got " + std::to_string(n));
  if (!(A > 0)) throw InvalidArgument("fit", "amplitude scale A must be positive");
  if (options.scale == Scale::log)
    for (const auto& e : series.entries)
      if (!(e.value > 0))
        throw InvalidArgument("fit", "non-positive value for '" + e.entity_id + "' under log scale");

  double N = options.N.value_or(static_cast<double>(n));
  for (const auto& e : series.entries)
    if (e.rank > N) throw InvalidArgument("fit", "rank exceeds N = " + fmt_real(N));

  FitResult out;
  out.scale = options.scale;
  out.model = {kind, A, N, {}};
  std::array<double, 3> theta = options.initial.value_or(initial_params(series, kind, A, N));
  if (kind == ModelKind::powerlaw) theta[2] = 0.0;
  if (kind == ModelKind::powerlaw_cutoff && theta[2] < 0) theta[2] = 0.0;

  Problem prob{series, out.model, options.scale, p};
  Eigen::VectorXd res;
  if (!prob.residuals(theta, res)) throw NumericError("fit", "model not evaluable at the initial parameters");
  double cost = res.squaredNorm();

  {
    const double cond = condition_number(prob.jacobian(theta));
    if (!(cond < 1e13))
      throw NumericError("fit", "singular normal equations (column-scaled condition number " + fmt_real(cond) + ")");
  }

  double damping = 1e-3;
  bool clamped = false;
  const auto P = static_cast<Eigen::Index>(p);
  for (out.iterations = 0; out.iterations < options.max_iter; ++out.iterations) {
    if (cost == 0) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd J = prob.jacobian(theta);
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * res;

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd lhs = JtJ;
      for (Eigen::Index k = 0; k < P; ++k) lhs(k, k) += damping * std::max(JtJ(k, k), 1e-300);
      const Eigen::VectorXd step = lhs.ldlt().solve(g);

      std::array<double, 3> trial = theta;
      for (Eigen::Index k = 0; k < P; ++k) trial[static_cast<std::size_t>(k)] += step[k];
      if (kind == ModelKind::powerlaw_cutoff && trial[2] < 0) {
        trial[2] = 0.0;
        clamped = true;
      }

      Eigen::VectorXd trial_res;
      const bool ok = step.allFinite() && prob.residuals(trial, trial_res);
      const double trial_cost = ok ? trial_res.squaredNorm() : std::numeric_limits<double>::infinity();
      if (trial_cost < cost) {
        double step_norm = 0, theta_norm = 0;
        for (std::size_t k = 0; k < p; ++k) {
          step_norm += (trial[k] - theta[k]) * (trial[k] - theta[k]);
          theta_norm += trial[k] * trial[k];
        }
        theta = trial;
        res = std::move(trial_res);
        cost = trial_cost;
        damping = std::max(damping / 10.0, 1e-15);
        accepted = true;
        if (std::sqrt(step_norm) <= options.tol * (std::sqrt(theta_norm) + options.tol)) out.converged = true;
      } else {
        damping *= 10.0;
        if (damping > 1e30) break;
      }
    }
    if (out.converged) {
      ++out.iterations;
      break;
    }
    if (!accepted) {
      // Even a vanishing gradient step fails to reduce the cost: stationary
      // to machine precision.
      out.converged = true;
      out.notes.push_back("stopped: no cost-reducing step at maximum damping");
      ++out.iterations;
      break;
    }
  }
  if (!out.converged && out.iterations >= options.max_iter)
    out.notes.push_back("max_iter reached before the parameter step fell below tol");
  if (clamped) out.notes.push_back("lambda clamped at 0 during iteration");

  out.model.params = theta;
  out.residuals.assign(res.data(), res.data() + res.size());

  // Standard errors from the final normal-equations inverse.
  {
    const Eigen::MatrixXd J = prob.jacobian(theta);
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const double s2 = n > p ? cost / static_cast<double>(n - p) : kNaN;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(JtJ);
    if (lu.isInvertible()) {
      const Eigen::MatrixXd cov = lu.inverse() * s2;
      for (Eigen::Index k = 0; k < P; ++k) out.std_errors[static_cast<std::size_t>(k)] = std::sqrt(cov(k, k));
    } else {
      for (std::size_t k = 0; k < p; ++k) out.std_errors[k] = kNaN;
    }
  }

  const auto lin = goodness(series, out.model, Scale::linear);
  out.r_squared_linear = lin.r_squared;
  out.chi_squared = lin.chi_squared;
  bool positive = true;
  for (const auto& e : series.entries) positive = positive && e.value > 0;
  out.r_squared_log = positive ? goodness(series, out.model, Scale::log).r_squared : kNaN;
  out.r_squared = options.scale == Scale::log ? out.r_squared_log : out.r_squared_linear;
  return out;
}

Goodness goodness(const rank::RankedSeries& series, const RankSizeModel& model, Scale scale) {
  std::vector<double> obs, pred;
  obs.reserve(series.size());
  pred.reserve(series.size());
  double chi2 = 0;
  for (const auto& e : series.entries) {
    const double f = model_eval(model, e.rank);
    chi2 += (e.value - f) * (e.value - f);
    if (scale == Scale::log) {
      if (!(e.value > 0) || !(f > 0)) throw InvalidArgument("fit", "log-scale R^2 needs positive data and model");
      obs.push_back(std::log(e.value));
      pred.push_back(std::log(f));
    } else {
      obs.push_back(e.value);
      pred.push_back(f);
    }
  }
  return {r_squared_of(obs, pred), chi2};
}

rank::RankedSeries remove_top_outliers(const rank::RankedSeries& series, std::size_t k) {
  if (k >= series.size())
    throw InvalidArgument("fit", "cannot drop " + std::to_string(k) + " of " + std::to_string(series.size()) + " entries");
  std::vector<rank::Item> items;
  items.reserve(series.size() - k);
  for (std::size_t i = k; i < series.size(); ++i) {
    const auto& e = series.entries[i];
    items.push_back({e.entity_id, e.name, e.value});
  }
  return rank::rank_desc(items, series.tiebreak, series.criterion);
}

std::vector<std::string> detect_outliers(const rank::RankedSeries& series, const FitResult& fit, double threshold) {
  const std::size_t n = series.size();
  const std::size_t p = param_count(fit.model.kind);
  if (n <= p + 1 || !std::isfinite(threshold)) return {};

  const Problem prob{series, fit.model, Scale::log, p};
  Eigen::VectorXd e;
  if (!prob.residuals(fit.model.params, e)) return {};
  const Eigen::MatrixXd J = prob.jacobian(fit.model.params);
  const Eigen::MatrixXd JtJ_inv = (J.transpose() * J).completeOrthogonalDecomposition().pseudoInverse();
  const double sse = e.squaredNorm();
  // Relative precision floor for the residual scale on the log axis.
  constexpr double kScaleFloor = 1e-8;

  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = J.row(static_cast<Eigen::Index>(i));
    const double h = (row * JtJ_inv * row.transpose())(0, 0);
    if (!(1.0 - h > 1e-12)) continue;
    const double ei = e[static_cast<Eigen::Index>(i)];
    const double s2 = std::max(0.0, (sse - ei * ei / (1.0 - h)) / static_cast<double>(n - p - 1));
    const double s = std::max(std::sqrt(s2), kScaleFloor);
    const double t = ei / (s * std::sqrt(1.0 - h));
    if (std::fabs(t) > threshold) out.push_back(series.entries[i].entity_id);
  }
  return out;
}

nlohmann::json to_json(const FitResult& fit) {
  const auto names = param_names(fit.model.kind);
  nlohmann::json params = nlohmann::json::object();
  nlohmann::json errors = nlohmann::json::object();
  for (std::size_t k = 0; k < names.size(); ++k) {
    params[names[k]] = json_real(fit.model.params[k]);
    errors[names[k]] = json_real(fit.std_errors[k]);
  }
  return {{"model", to_string(fit.model.kind)},
          {"A", json_real(fit.model.A)},
          {"N", json_real(fit.model.N)},
          {"scale", to_string(fit.scale)},
          {"params", params},
          {"std_errors", errors},
          {"r_squared", json_real(fit.r_squared)},
          {"r_squared_log", json_real(fit.r_squared_log)},
          {"r_squared_linear", json_real(fit.r_squared_linear)},
          {"chi_squared", json_real(fit.chi_squared)},
          {"excluded", fit.excluded},
          {"iterations", fit.iterations},
          {"converged", fit.converged},
          {"notes", fit.notes}};
}

std::string to_text(const FitResult& fit) {
  std::string out;
  out += "model       " + to_string(fit.model.kind) + "\n";
  out += "scale       " + to_string(fit.scale) + "\n";
  out += "A           " + fmt_real(fit.model.A) + "\n";
  out += "N           " + fmt_real(fit.model.N) + "\n";
  const auto names = param_names(fit.model.kind);
  for (std::size_t k = 0; k < names.size(); ++k) {
    std::string label = names[k];
    label.resize(12, ' ');
    out += label + fmt_real(fit.model.params[k]) + " +- " + fmt_real(fit.std_errors[k]) + "\n";
  }
  out += "R2 (log)    " + fmt_real(fit.r_squared_log) + "\n";
  out += "R2 (linear) " + fmt_real(fit.r_squared_linear) + "\n";
  out += "chi2        " + fmt_real(fit.chi_squared) + "\n";
  out += "iterations  " + std::to_string(fit.iterations) + (fit.converged ? " (converged)" : " (not converged)") + "\n";
  if (!fit.excluded.empty()) {
    out += "excluded   ";
    for (const auto& id : fit.excluded) out += " " + id;
    out += "\n";
  }
  for (const auto& note : fit.notes) out += "note: " + note + "\n";
  return out;
}

std::string curve_csv(const rank::RankedSeries& series, const FitResult& fit) {
  std::string out = "r,y,yhat,residual\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& e = series.entries[i];
    const double res = i < fit.residuals.size() ? fit.residuals[i] : kNaN;
    out += fmt_real(e.rank) + "," + fmt_real(e.value) + "," + fmt_real(model_eval(fit.model, e.rank)) + "," +
           fmt_real(res) + "\n";
  }
  return out;
}

}  // namespace ranklaw::fit
