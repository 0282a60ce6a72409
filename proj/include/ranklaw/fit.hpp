#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ranklaw/rank.hpp"

namespace ranklaw::fit {

/// Rank-size laws, all with a fixed (not fitted) amplitude scale A:
///
///   lavalette3      y(r) = A m1 r^-m2 (N - r + 1)^m3
///   powerlaw        y(r) = A c r^-beta
///   powerlaw_cutoff y(r) = A h r^-alpha exp(-lambda r)
///
/// lavalette3 is also written kappa3 (N r)^-gamma / (N - r + 1)^-xi; that form
/// is the same curve with kappa3 = A m1 N^m2, gamma = m2, xi = m3.
enum class ModelKind { lavalette3, powerlaw, powerlaw_cutoff };

ModelKind parse_model_kind(const std::string& s);  // "lavalette3" | "powerlaw" | "cutoff"
std::string to_string(ModelKind k);
std::size_t param_count(ModelKind k);
std::vector<std::string> param_names(ModelKind k);

enum class Scale { log, linear };
Scale parse_scale(const std::string& s);
std::string to_string(Scale s);

struct RankSizeModel {
  ModelKind kind = ModelKind::lavalette3;
  double A = 1.0;
  double N = 2.0;  // maximum rank
  std::array<double, 3> params{};

  static RankSizeModel lavalette3(double A, double N, double m1, double m2, double m3);
  static RankSizeModel powerlaw(double A, double N, double c, double beta);
  static RankSizeModel powerlaw_cutoff(double A, double N, double h, double alpha, double lambda);
};

/// Throws InvalidArgument unless 1 <= r <= N.
double model_eval(const RankSizeModel& model, double r);
/// Analytic ∂y/∂params at r; unused trailing entries are 0.
std::array<double, 3> model_gradient(const RankSizeModel& model, double r);

struct FitOptions {
  Scale scale = Scale::log;
  int max_iter = 500;
  double tol = 1e-8;
  /// Maximum rank used in the model; defaults to the series size.
  std::optional<double> N;
  /// Starting parameters; defaults to the deterministic initializer.
  std::optional<std::array<double, 3>> initial;
};

struct FitResult {
  RankSizeModel model;
  Scale scale = Scale::log;
  double r_squared = 0.0;  // on the fitting scale
  double r_squared_log = 0.0;
  double r_squared_linear = 0.0;
  double chi_squared = 0.0;  // Σ (y - ŷ)^2 on the linear scale
  std::vector<double> residuals;  // fitting scale, rank order
  std::array<double, 3> std_errors{};
  std::vector<std::string> excluded;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> notes;
};

/// Default amplitude scale, 10^floor(log10(max y)).
double default_amplitude(const rank::RankedSeries& series);

/// Starting point: m2 from the log-log slope over the middle half of ranks,
/// m3 from the tail quarter against log(N - r + 1), m1 from the intercept.
std::array<double, 3> initial_params(const rank::RankedSeries& series, ModelKind kind, double A, double N);

/// Damped least squares (Levenberg-Marquardt, damping x10 on a rejected step,
/// /10 on an accepted one). Throws NumericError on singular normal equations
/// and InvalidArgument on non-positive data under log scale. Non-convergence
/// is reported through FitResult::converged.
FitResult fit_model(const rank::RankedSeries& series, ModelKind kind, double A, const FitOptions& options = {});

struct Goodness {
  double r_squared;
  double chi_squared;
};

Goodness goodness(const rank::RankedSeries& series, const RankSizeModel& model, Scale scale);

/// Drops ranks 1..k and re-ranks the remainder from 1.
rank::RankedSeries remove_top_outliers(const rank::RankedSeries& series, std::size_t k);

/// Entities whose externally studentized log-scale residual exceeds threshold,
/// in rank order.
std::vector<std::string> detect_outliers(const rank::RankedSeries& series, const FitResult& fit,
                                         double threshold = 3.0);

nlohmann::json to_json(const FitResult& fit);
std::string to_text(const FitResult& fit);
/// Per-rank "r,y,yhat,residual" table; the residual is on the fitting scale.
std::string curve_csv(const rank::RankedSeries& series, const FitResult& fit);

}  // namespace ranklaw::fit
