#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "focus/errors.hpp"
#include "focus/sim.hpp"

namespace {

using focus::DgpConfig;
using focus::DgpKind;

TEST(Msrpe, Examples) {
  EXPECT_EQ(focus::msrpe(Eigen::Vector2d(1, 3), Eigen::Vector2d(1, 3)), 0.0);
  EXPECT_DOUBLE_EQ(focus::msrpe(Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 2.0)), 0.25);
  EXPECT_EQ(focus::msrpe(Eigen::Vector2d(5, 2), Eigen::Vector2d(0, 2)), 0.0);
  EXPECT_THROW(focus::msrpe(Eigen::Vector2d(1, 1), Eigen::Vector2d(0, -1)), focus::Error);
}

TEST(Wilcoxon, AllNegativeIsMostExtreme) {
  std::vector<double> d;
  for (int k = 1; k <= 10; ++k) d.push_back(-0.1 * k);
  EXPECT_NEAR(focus::wilcoxon_one_sided(d), 1.0 / 1024.0, 1e-15);
}

// P(W+ <= w) by enumerating every sign pattern.
double brute_wilcoxon(const std::vector<double>& d) {
  const auto n = d.size();
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  double w = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    if (d[order[r]] > 0) w += static_cast<double>(r + 1);
  int hits = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      if (mask & (1u << r)) s += static_cast<double>(r + 1);
    if (s <= w) ++hits;
  }
  return hits / std::pow(2.0, static_cast<double>(n));
}

TEST(Wilcoxon, ExactMatchesEnumeration) {
  const std::vector<double> d{0.3, -1.2, -0.7, 2.5, -0.05, -3.1, 0.9, -1.8, -0.4, 1.1, -2.2, -0.6};
  EXPECT_NEAR(focus::wilcoxon_one_sided(d), brute_wilcoxon(d), 1e-14);
}

TEST(Wilcoxon, SymmetricNearHalf) {
  const std::vector<double> d{1, -1, 2, -2, 3, -3, 4, -4, 5, -5};
  EXPECT_NEAR(focus::wilcoxon_one_sided(d), 0.5, 0.1);
}

TEST(Wilcoxon, NormalApproximationForLargeN) {
  std::vector<double> d;
  for (int k = 1; k <= 40; ++k) d.push_back(k % 3 == 0 ? 0.1 * k : -0.1 * k);
  const double p = focus::wilcoxon_one_sided(d);
  EXPECT_GT(p, 0.0);
  EXPECT_LT(p, 0.05);
}

TEST(Wilcoxon, TooFewSamples) {
  try {
    focus::wilcoxon_one_sided({-1, -2, 0, 3, 4, 0});
    FAIL();
  } catch (const focus::Error& e) {
    EXPECT_EQ(e.code(), focus::ErrorCode::kTooFewSamples);
  }
}

TEST(Dgp, SeedDeterminism) {
  const auto cfg = DgpConfig::dgp3(20, 40, 77);
  const auto a = focus::generate_panel(cfg);
  const auto b = focus::generate_panel(cfg);
  EXPECT_EQ(a.panel.values(), b.panel.values());
  EXPECT_EQ(a.panel.mask(), b.panel.mask());
  EXPECT_EQ(a.truth.targets, b.truth.targets);
}

TEST(Dgp, NoiselessIsRankOne) {
  auto cfg = DgpConfig::dgp1(30, 40, 2);
  cfg.noise_sd = 0.0;
  cfg.pattern = focus::PatternConfig::fully_observed();
  const auto sim = focus::generate_panel(cfg);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sim.panel.values());
  EXPECT_LT(svd.singularValues()(1), 1e-10);
}

TEST(Dgp, Dgp1Autocorrelation) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto sim = focus::generate_panel(DgpConfig::dgp1(64, 256, seed));
    const Eigen::VectorXd f = sim.truth.factors.col(0);
    const double m = f.mean();
    const Eigen::ArrayXd c = f.array() - m;
    total += (c.head(255) * c.tail(255)).sum() / c.square().sum();
  }
  EXPECT_NEAR(total / 10.0, 0.5, 0.1);
}

TEST(Dgp, Dgp1TargetIsConditionalMean) {
  const auto sim = focus::generate_panel(DgpConfig::dgp1(10, 50, 4));
  const double f_last = sim.truth.factors(49, 0);
  for (Eigen::Index i = 0; i < 10; ++i) {
    EXPECT_NEAR(sim.truth.targets(i, 0), sim.truth.loadings(i, 0) * 0.5 * f_last, 1e-12);
  }
}

TEST(Dgp, Dgp3TargetsFromStateSpace) {
  auto cfg = DgpConfig::dgp3(6, 64, 9);
  cfg.horizon = 3;
  const auto sim = focus::generate_panel(cfg);
  const auto& ar = cfg.ar_coefficients;
  const auto& ma = cfg.ma_coefficients;
  const Eigen::Index t_len = 64;
  // Iterate the ARMA recursion with future innovations set to zero.
  std::vector<double> s, e;
  for (Eigen::Index t = 0; t < t_len; ++t) {
    s.push_back(sim.truth.stochastic(t, 0));
    e.push_back(sim.truth.innovations(t, 0));
  }
  for (int h = 1; h <= 3; ++h) {
    double v = 0.0;
    const auto now = s.size();
    for (std::size_t j = 0; j < ar.size(); ++j) v += ar[j] * s[now - 1 - j];
    for (std::size_t m = 0; m < ma.size(); ++m) v += ma[m] * e[now - 1 - m];
    s.push_back(v);
    e.push_back(0.0);
    const double tt = static_cast<double>(t_len + h);
    const double trend = 2.0 * tt * tt / (64.0 * 64.0);
    for (Eigen::Index i = 0; i < 6; ++i) {
      EXPECT_NEAR(sim.truth.targets(i, h - 1), sim.truth.loadings(i, 0) * (v + trend), 1e-10);
    }
  }
}

TEST(Dgp, UnstableRejected) {
  auto cfg = DgpConfig::dgp1(10, 20, 1);
  cfg.ar_coefficients = {1.05};
  try {
    focus::generate_panel(cfg);
    FAIL();
  } catch (const focus::Error& e) {
    EXPECT_EQ(e.code(), focus::ErrorCode::kUnstableDgp);
  }
}

TEST(Baselines, Definitions) {
  focus::FactorModelFit fit;
  fit.factors.resize(3, 1);
  fit.factors << 1.0, 2.0, 6.0;
  fit.loadings.resize(2, 1);
  fit.loadings << 0.5, -1.0;
  fit.rank = 1;
  fit.loading_ok = {true, true};
  const focus::Panel panel(Eigen::MatrixXd::Zero(2, 3));
  EXPECT_TRUE(focus::baseline_forecast(panel, fit, focus::BaselineKind::kPersistence)
                  .isApprox(Eigen::Vector2d(3.0, -6.0)));
  EXPECT_TRUE(focus::baseline_forecast(panel, fit, focus::BaselineKind::kStaticFactor)
                  .isApprox(Eigen::Vector2d(1.5, -3.0)));
  EXPECT_EQ(focus::baseline_forecast(panel, fit, focus::BaselineKind::kMean), Eigen::Vector2d::Zero());
}

TEST(Baselines, MeanBeatsPersistenceOnWhiteNoise) {
  auto cfg = DgpConfig::dgp1(32, 64, 0);
  cfg.ar_coefficients = {0.0};
  double mean_err = 0.0;
  double pers_err = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    const auto sim = focus::generate_panel(cfg);
    focus::TrialSpec spec;
    spec.dgp = cfg;
    spec.method = focus::Method::kMean;
    mean_err += focus::run_trial(spec, sim).msfe;
    spec.method = focus::Method::kPersistence;
    pers_err += focus::run_trial(spec, sim).msfe;
  }
  EXPECT_LT(mean_err, pers_err);
}

TEST(Trial, NoiselessFullObservationIsAccurate) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    focus::TrialSpec spec;
    spec.dgp = DgpConfig::dgp1(64, 256, seed);
    spec.dgp.noise_sd = 0.0;
    spec.dgp.pattern = focus::PatternConfig::fully_observed();
    const auto r = focus::run_trial(spec);
    ASSERT_FALSE(r.failed) << r.error;
    total += r.msfe;
  }
  EXPECT_LT(total / 5.0, 1e-2);
}

TEST(Experiment, SmokeOneCell) {
  focus::ExperimentGrid g;
  g.n_times = {32};
  g.trials = 1;
  g.n_units = 16;
  const auto r = focus::run_experiment(g);
  EXPECT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.cells.size(), 3u);
}

TEST(Experiment, DeterministicAcrossThreadCounts) {
  focus::ExperimentGrid g;
  g.n_times = {32, 64};
  g.trials = 4;
  g.n_units = 16;
  const auto a = focus::run_experiment(g);
  g.threads = 3;
  const auto b = focus::run_experiment(g);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_EQ(a.rows[k].msfe, b.rows[k].msfe);
    EXPECT_EQ(a.rows[k].seed, b.rows[k].seed);
    EXPECT_EQ(a.rows[k].method, b.rows[k].method);
  }
}

TEST(Experiment, FocusRowHasNoWilcoxon) {
  focus::ExperimentGrid g;
  g.n_times = {32};
  g.trials = 6;
  g.n_units = 16;
  g.methods = {focus::Method::kFocus, focus::Method::kMean};
  const auto r = focus::run_experiment(g);
  for (const auto& c : r.cells) {
    if (c.method == "focus") {
      EXPECT_TRUE(std::isnan(c.wilcoxon_p));
    }
  }
}

TEST(Experiment, GridValidation) {
  focus::ExperimentGrid g;
  g.n_times = {3};
  EXPECT_THROW(focus::validate_grid(g), focus::Error);
  g.n_times = {32};
  g.trials = 0;
  EXPECT_THROW(focus::validate_grid(g), focus::Error);
}

TEST(Experiment, LogLogSlope) {
  const std::vector<double> x{32, 64, 128, 256};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 / v);
  EXPECT_NEAR(focus::log_log_slope(x, y), -1.0, 1e-12);
}

TEST(Names, RoundTrip) {
  for (auto k : {DgpKind::kDgp1, DgpKind::kDgp2, DgpKind::kDgp3}) {
    EXPECT_EQ(focus::parse_dgp(focus::dgp_name(k)), k);
  }
  for (auto m : {focus::Method::kFocus, focus::Method::kFocusDetrend, focus::Method::kPersistence,
                 focus::Method::kMean, focus::Method::kStaticFactor}) {
    EXPECT_EQ(focus::parse_method(focus::method_name(m)), m);
  }
  EXPECT_THROW(focus::parse_method("nope"), focus::Error);
}

}  // namespace
