#include <gtest/gtest.h>

#include <cmath>

#include "ranklaw/error.hpp"
#include "ranklaw/fit.hpp"
#include "ranklaw/urnsim.hpp"
#include "reference_data.hpp"

using namespace ranklaw;
using namespace ranklaw::fit;

namespace {

rank::RankedSeries exact_series(const RankSizeModel& m) { return urnsim::generate_ranksize(m, 0.0, 1); }

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

}  // namespace

TEST(Fit, EvalMatchesClosedForm) {
  const auto m = RankSizeModel::lavalette3(1000, 20, 0.8, 0.7, 0.2);
  EXPECT_NEAR(model_eval(m, 3), 1000 * 0.8 * std::pow(3.0, -0.7) * std::pow(18.0, 0.2), 1e-10);
  const auto p = RankSizeModel::powerlaw(10, 50, 2, 1.1);
  EXPECT_NEAR(model_eval(p, 7), 20 * std::pow(7.0, -1.1), 1e-13);
  const auto c = RankSizeModel::powerlaw_cutoff(10, 50, 2, 1.1, 0.05);
  EXPECT_NEAR(model_eval(c, 7), 20 * std::pow(7.0, -1.1) * std::exp(-0.35), 1e-13);
  EXPECT_THROW(model_eval(m, 0.5), InvalidArgument);
  EXPECT_THROW(model_eval(m, 21), InvalidArgument);
}

TEST(Fit, EndpointValues) {
  const auto m = RankSizeModel::lavalette3(1000, 20, 0.8, 0.7, 0.2);
  EXPECT_NEAR(model_eval(m, 1), 1000 * 0.8 * std::pow(20.0, 0.2), 1e-10);
  EXPECT_NEAR(model_eval(m, 20), 1000 * 0.8 * std::pow(20.0, -0.7), 1e-10);
}

TEST(Fit, EqualExponentsGiveLogAntisymmetry) {
  // With m2 = m3 the curve satisfies y(r) y(N - r + 1) = (A m1)^2.
  const auto m = RankSizeModel::lavalette3(100, 41, 0.5, 0.6, 0.6);
  for (double r = 1; r <= 41; ++r)
    EXPECT_NEAR(model_eval(m, r) * model_eval(m, 42 - r), 50.0 * 50.0, 1e-9) << r;
  EXPECT_NEAR(model_eval(m, 21), 50.0, 1e-12);
}

TEST(Fit, KappaFormIsTheSameCurve) {
  const double A = 1e3, N = 30, m1 = 0.9, m2 = 0.8, m3 = 0.3;
  const auto m = RankSizeModel::lavalette3(A, N, m1, m2, m3);
  const double kappa = A * m1 * std::pow(N, m2);
  for (double r = 1; r <= N; ++r) {
    const double y = kappa * std::pow(N * r, -m2) / std::pow(N - r + 1, -m3);
    EXPECT_NEAR(model_eval(m, r), y, 1e-12 * y);
  }
}

TEST(Fit, JacobianMatchesFiniteDifferences) {
  const double grid1[] = {0.5, 1.0, 2.0}, grid2[] = {0.3, 0.7, 1.2}, grid3[] = {0.1, 0.3, 0.6};
  for (double a : grid1)
    for (double b : grid2)
      for (double c : grid3)
        for (auto kind : {ModelKind::lavalette3, ModelKind::powerlaw_cutoff}) {
          RankSizeModel m{kind, 100.0, 50.0, {a, b, kind == ModelKind::powerlaw_cutoff ? c / 10 : c}};
          for (double r : {1.0, 7.0, 25.0, 50.0}) {
            const auto g = model_gradient(m, r);
            for (std::size_t k = 0; k < param_count(kind); ++k) {
              const double h = 1e-6 * std::max(1.0, std::fabs(m.params[k]));
              auto up = m, dn = m;
              up.params[k] += h;
              dn.params[k] -= h;
              const double fd = (model_eval(up, r) - model_eval(dn, r)) / (2 * h);
              const double scale = std::max(std::fabs(fd), 1e-8 * model_eval(m, r));
              EXPECT_LE(std::fabs(g[k] - fd) / scale, 1e-5) << "kind " << to_string(kind) << " k=" << k << " r=" << r;
            }
          }
        }
}

TEST(Fit, NoiseFreeRecovery) {
  for (double N : {20.0, 8092.0}) {
    const auto truth = RankSizeModel::lavalette3(1000, N, 0.85, 0.68, 0.21);
    const auto s = exact_series(truth);
    for (auto scale : {Scale::log, Scale::linear}) {
      FitOptions opt;
      opt.scale = scale;
      const auto f = fit_model(s, ModelKind::lavalette3, 1000, opt);
      EXPECT_TRUE(f.converged);
      for (int k = 0; k < 3; ++k) EXPECT_LT(rel(f.model.params[k], truth.params[k]), 1e-3) << N << " " << k;
      EXPECT_GT(f.r_squared, 1 - 1e-9);
    }
  }
}

TEST(Fit, NoisyRecovery) {
  const auto truth = RankSizeModel::lavalette3(1000, 500, 0.85, 0.68, 0.21);
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = urnsim::generate_ranksize(truth, 0.01, seed);
    const auto f = fit_model(s, ModelKind::lavalette3, 1000);
    bool good = true;
    for (int k = 0; k < 3; ++k) good = good && rel(f.model.params[k], truth.params[k]) < 0.05;
    ok += good;
  }
  EXPECT_GE(ok, 18);
}

TEST(Fit, PowerlawAndCutoffRecovery) {
  const auto p = RankSizeModel::powerlaw(100, 200, 3.0, 0.9);
  const auto fp = fit_model(exact_series(p), ModelKind::powerlaw, 100);
  EXPECT_LT(rel(fp.model.params[0], 3.0), 1e-6);
  EXPECT_LT(rel(fp.model.params[1], 0.9), 1e-6);

  const auto c = RankSizeModel::powerlaw_cutoff(100, 200, 3.0, 0.9, 0.01);
  const auto fc = fit_model(exact_series(c), ModelKind::powerlaw_cutoff, 100);
  EXPECT_LT(rel(fc.model.params[0], 3.0), 1e-5);
  EXPECT_LT(rel(fc.model.params[1], 0.9), 1e-5);
  EXPECT_LT(rel(fc.model.params[2], 0.01), 1e-4);
}

TEST(Fit, RegionCountsLinearScale) {
  const auto s = testdata::region_count_series();
  FitOptions opt;
  opt.scale = Scale::linear;
  const auto f = fit_model(s, ModelKind::lavalette3, 1e3, opt);
  EXPECT_NEAR(f.model.params[0], 0.847, 0.0847);
  EXPECT_NEAR(f.model.params[1], 0.68, 0.068);
  EXPECT_NEAR(f.model.params[2], 0.209, 0.0209);
  EXPECT_GE(f.r_squared, 0.94);
  EXPECT_NEAR(f.chi_squared, 106013, 1.0);
  EXPECT_DOUBLE_EQ(f.model.N, 20);
}

TEST(Fit, GoodnessIsOneOnExactCurve) {
  const auto m = RankSizeModel::lavalette3(10, 30, 1, 0.5, 0.2);
  const auto g = goodness(exact_series(m), m, Scale::log);
  EXPECT_NEAR(g.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(g.chi_squared, 0.0, 1e-18);
}

TEST(Fit, SingularDesignIsReported) {
  // With N far beyond the data the (N - r + 1) column is constant to machine
  // precision and collinear with the amplitude column.
  const auto s = exact_series(RankSizeModel::powerlaw(10, 30, 1, 0.5));
  FitOptions opt;
  opt.N = 1e17;
  EXPECT_THROW(fit_model(s, ModelKind::lavalette3, 10, opt), NumericError);
}

TEST(Fit, LogScaleRejectsNonPositiveData) {
  const auto s = rank::rank_desc(std::map<std::string, double>{{"a", 3}, {"b", 2}, {"c", 1}, {"d", 0}});
  EXPECT_THROW(fit_model(s, ModelKind::lavalette3, 1), InvalidArgument);
}

TEST(Fit, RemoveTopOutliersReranks) {
  const auto s = testdata::region_count_series();
  const auto t = remove_top_outliers(s, 2);
  ASSERT_EQ(t.size(), 18u);
  EXPECT_EQ(t.entries[0].entity_id, "Veneto");
  EXPECT_DOUBLE_EQ(t.entries[0].rank, 1);
  EXPECT_THROW(remove_top_outliers(s, 20), InvalidArgument);
}

TEST(Fit, DetectsPlantedOutlier) {
  auto m = RankSizeModel::lavalette3(100, 60, 1, 0.6, 0.3);
  auto s = urnsim::generate_ranksize(m, 0.01, 4);
  s.entries[30].value *= 1.5;
  const auto f = fit_model(s, ModelKind::lavalette3, 100);
  const auto flagged = detect_outliers(s, f);
  ASSERT_FALSE(flagged.empty());
  EXPECT_EQ(flagged.front(), s.entries[30].entity_id);
}

TEST(Fit, OutputFormats) {
  const auto s = testdata::region_count_series();
  const auto f = fit_model(s, ModelKind::lavalette3, 1e3);
  const auto j = to_json(f);
  EXPECT_EQ(j["scale"], "log");
  EXPECT_TRUE(j.contains("params"));
  const auto csv = curve_csv(s, f);
  EXPECT_EQ(csv.rfind("r,y,yhat,residual\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
  EXPECT_NE(to_text(f).find("m2"), std::string::npos);
}

TEST(Fit, DefaultAmplitude) {
  EXPECT_DOUBLE_EQ(default_amplitude(testdata::region_count_series()), 1000);
}

TEST(Fit, CutoffLavaletteBridgeClosedForm) {
  // Lavalette with m1 = h exp(-lambda N), m2 = alpha, m3 = lambda against the
  // cutoff law: the ratio is exp(lambda (x - ln(1 + x))) with x = N - r.
  const double A = 1, h = 2, alpha = 0.8;
  for (double N : {20.0, 100.0, 1000.0})
    for (double lambda : {0.01, 0.05, 0.1}) {
      const auto cut = RankSizeModel::powerlaw_cutoff(A, N, h, alpha, lambda);
      const auto lav = RankSizeModel::lavalette3(A, N, h * std::exp(-lambda * N), alpha, lambda);
      for (double r = std::ceil(0.95 * N); r <= N; ++r) {
        const double x = N - r;
        const double expected = std::exp(lambda * (x - std::log1p(x)));
        EXPECT_NEAR(model_eval(cut, r) / model_eval(lav, r) / expected, 1.0, 1e-11) << N << " " << lambda << " " << r;
      }
    }
}

TEST(Fit, CutoffLavaletteBridgeWithinTwoPercent) {
  const double N = 20;
  for (double lambda : {0.01, 0.02, 0.05}) {
    const auto cut = RankSizeModel::powerlaw_cutoff(1, N, 2, 0.8, lambda);
    const auto lav = RankSizeModel::lavalette3(1, N, 2 * std::exp(-lambda * N), 0.8, lambda);
    for (double r = 19; r <= N; ++r) EXPECT_LT(rel(model_eval(lav, r), model_eval(cut, r)), 0.02) << lambda << " " << r;
  }
}
