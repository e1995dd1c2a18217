#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "focus/dynamics.hpp"
#include "focus/errors.hpp"
#include "focus/linalg.hpp"
#include "test_util.hpp"

namespace {

Eigen::MatrixXd scalar_ar(const std::vector<double>& coef, Eigen::Index t_len, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 0.5);
  std::vector<double> x(coef.size(), 0.0);
  Eigen::MatrixXd f(t_len, 1);
  for (Eigen::Index t = -300; t < t_len; ++t) {
    double v = z(rng);
    for (std::size_t j = 0; j < coef.size(); ++j) v += coef[j] * x[j];
    x.insert(x.begin(), v);
    x.pop_back();
    if (t >= 0) f(t, 0) = v;
  }
  return f;
}

TEST(FitVar, ExactRecursion) {
  Eigen::MatrixXd a(2, 2);
  a << 0.5, 0.0, 0.1, 0.3;
  Eigen::MatrixXd f(50, 2);
  Eigen::Vector2d x(1.0, -2.0);
  for (Eigen::Index t = 0; t < 50; ++t) {
    f.row(t) = x.transpose();
    x = a * x;
  }
  const auto dyn = focus::fit_var(f.topRows(12), 1);
  EXPECT_TRUE(dyn.coef[0].isApprox(a, 1e-10));
  EXPECT_LT(dyn.innovation_cov.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(dyn.spectral_radius, 0.5, 1e-10);
  EXPECT_TRUE(dyn.stable());
}

TEST(FitVar, WhiteNoiseCoefficientSmall) {
  std::mt19937_64 rng(1);
  const auto dyn = focus::fit_var(focus::test::gaussian(10000, 1, rng), 1);
  EXPECT_LT(std::abs(dyn.coef[0](0, 0)), 0.05);
}

TEST(FitVar, LongAr1Consistent) {
  std::mt19937_64 rng(2);
  const auto dyn = focus::fit_var(scalar_ar({0.5}, 100000, rng), 1);
  EXPECT_NEAR(dyn.coef[0](0, 0), 0.5, 0.01);
  EXPECT_NEAR(dyn.innovation_cov(0, 0), 0.25, 0.01);
}

TEST(FitVar, Preconditions) {
  EXPECT_THROW(focus::fit_var(Eigen::MatrixXd::Random(3, 2), 1), focus::Error);
  EXPECT_THROW(focus::fit_var(Eigen::MatrixXd::Random(30, 1), 0), focus::Error);
  try {
    focus::fit_var(Eigen::MatrixXd::Ones(20, 2), 1);
    FAIL();
  } catch (const focus::Error& e) {
    EXPECT_EQ(e.code(), focus::ErrorCode::kSingularGram);
  }
}

// AIC overfits a true AR(1) with probability near 0.27 when four larger
// orders are available, so about 37 of 50 seeds pick order one.
TEST(SelectOrder, Ar1MostlyOrderOne) {
  int ones = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    if (focus::select_order(scalar_ar({0.5}, 512, rng), 5) == 1) ++ones;
  }
  EXPECT_GE(ones, 30);
}

TEST(SelectOrder, Ar3ModalOrderThree) {
  std::vector<int> hist(6, 0);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(100 + seed);
    ++hist[static_cast<std::size_t>(focus::select_order(scalar_ar({0.5, -0.4, 0.2}, 512, rng), 5))];
  }
  EXPECT_EQ(std::max_element(hist.begin(), hist.end()) - hist.begin(), 3);
}

TEST(SelectOrder, WhiteNoiseFavoursOrderOne) {
  std::vector<int> hist(6, 0);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(500 + seed);
    ++hist[static_cast<std::size_t>(focus::select_order(focus::test::gaussian(256, 1, rng), 5))];
  }
  EXPECT_EQ(std::max_element(hist.begin(), hist.end()) - hist.begin(), 1);
}

TEST(SelectOrder, TooLongRejected) {
  EXPECT_THROW(focus::select_order(Eigen::MatrixXd::Random(10, 2), 5), focus::Error);
}

focus::FactorModelFit scalar_fit(double lambda, double f_last) {
  focus::FactorModelFit fit;
  fit.factors = Eigen::MatrixXd::Constant(4, 1, f_last);
  fit.loadings = Eigen::MatrixXd::Constant(1, 1, lambda);
  fit.rank = 1;
  fit.loading_ok = {true};
  return fit;
}

focus::VarDynamics scalar_dyn(double a) {
  focus::VarDynamics dyn;
  dyn.coef = {Eigen::MatrixXd::Constant(1, 1, a)};
  dyn.innovation_cov = Eigen::MatrixXd::Zero(1, 1);
  return dyn;
}

TEST(Forecast, ScalarArithmetic) {
  EXPECT_DOUBLE_EQ(focus::forecast(scalar_fit(2.0, 1.0), scalar_dyn(0.5), 0, 3), 0.25);
  for (int h : {1, 2, 7}) EXPECT_EQ(focus::forecast(scalar_fit(2.0, 1.0), scalar_dyn(0.0), 0, h), 0.0);
}

TEST(Forecast, DegenerateUnitThrows) {
  auto fit = scalar_fit(2.0, 1.0);
  fit.loading_ok[0] = false;
  try {
    focus::forecast(fit, scalar_dyn(0.5), 0, 1);
    FAIL();
  } catch (const focus::Error& e) {
    EXPECT_EQ(e.code(), focus::ErrorCode::kDegenerateUnit);
  }
}

TEST(Forecast, CompositionOfHorizons) {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd a(2, 2);
  a << 0.6, 0.2, -0.1, 0.4;
  const Eigen::MatrixXd f = focus::test::var_path(a, 100, 1.0, rng);
  const auto dyn = focus::fit_var(f, 1);
  for (int h : {2, 4, 6}) {
    focus::VarDynamics pow = dyn;
    pow.coef[0] = focus::matrix_power(dyn.coef[0], h);
    const Eigen::VectorXd direct = focus::forecast_factors(dyn, f, h);
    const Eigen::VectorXd one_step = focus::forecast_factors(pow, f, 1);
    EXPECT_LT((direct - one_step).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Forecast, CompanionIterationForHigherOrder) {
  focus::VarDynamics dyn;
  dyn.order = 2;
  dyn.coef = {Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::MatrixXd::Constant(1, 1, 0.25)};
  Eigen::MatrixXd f(3, 1);
  f << 9.0, 2.0, 4.0;
  // F_{T+1} = 0.5*4 + 0.25*2 = 2.5, F_{T+2} = 0.5*2.5 + 0.25*4 = 2.25
  EXPECT_DOUBLE_EQ(focus::forecast_factors(dyn, f, 1)(0), 2.5);
  EXPECT_DOUBLE_EQ(focus::forecast_factors(dyn, f, 2)(0), 2.25);
}

TEST(Forecast, RotationInvariance) {
  std::mt19937_64 rng(4);
  Eigen::MatrixXd a(2, 2);
  a << 0.7, 0.1, 0.0, 0.4;
  focus::FactorModelFit fit;
  fit.factors = focus::test::var_path(a, 80, 0.5, rng);
  fit.loadings = focus::test::gaussian(10, 2, rng);
  fit.rank = 2;
  fit.loading_ok.assign(10, true);
  const auto dyn = focus::fit_var(fit.factors, 1);
  for (int k = 0; k < 10; ++k) {
    const Eigen::MatrixXd h = focus::test::gaussian(2, 2, rng);
    focus::FactorModelFit rot = fit;
    rot.factors = fit.factors * h.transpose();
    rot.loadings = fit.loadings * h.inverse();
    const auto dyn_h = focus::fit_var(rot.factors, 1);
    for (Eigen::Index i = 0; i < 10; ++i) {
      EXPECT_NEAR(focus::forecast(fit, dyn, i, 3), focus::forecast(rot, dyn_h, i, 3), 1e-9);
    }
  }
}

TEST(PowerNorms, Examples) {
  const auto half = focus::matrix_power_norms(0.5 * Eigen::MatrixXd::Identity(2, 2), 10);
  for (int n = 1; n <= 10; ++n) EXPECT_DOUBLE_EQ(half[static_cast<std::size_t>(n - 1)], std::pow(0.5, n));
  Eigen::MatrixXd nil(2, 2);
  nil << 0, 1, 0, 0;
  const auto z = focus::matrix_power_norms(nil, 4);
  EXPECT_DOUBLE_EQ(z[0], 1.0);
  for (std::size_t n = 1; n < 4; ++n) EXPECT_EQ(z[n], 0.0);
}

TEST(PowerNorms, GeometricMajorantPastBurnIn) {
  Eigen::MatrixXd a(2, 2);
  a << 0.9, 5.0, 0.0, 0.8;
  const auto norms = focus::matrix_power_norms(a, 400);
  const double q = (1.0 + 0.9) / 2.0;
  int burn = 0;
  for (int n = 1; n <= 400; ++n) {
    if (norms[static_cast<std::size_t>(n - 1)] >= std::pow(q, n)) burn = n;
  }
  EXPECT_GT(burn, 0);  // the non-normal part makes early powers exceed q^n
  EXPECT_LT(burn, 200);
}

TEST(CrossSlot, IdentityAndExactMap) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd f = focus::test::gaussian(40, 2, rng);
  const auto src = focus::slot_rows(0, 2, 40);
  const auto tgt = focus::slot_rows(1, 2, 40);
  ASSERT_EQ(src.size(), 20u);
  EXPECT_TRUE(focus::fit_cross_slot_map(f, src, src).isIdentity(1e-10));

  Eigen::MatrixXd m(2, 2);
  m << 0.3, -1.2, 0.7, 0.1;
  Eigen::MatrixXd g = f;
  for (std::size_t k = 0; k < src.size(); ++k) g.row(tgt[k]) = (m * f.row(src[k]).transpose()).transpose();
  EXPECT_TRUE(focus::fit_cross_slot_map(g, src, tgt).isApprox(m, 1e-10));
}

TEST(CrossSlot, RecoversInjectedCorrelation) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z(0.0, 1.0);
  const Eigen::Index days = 40;
  const Eigen::Index period = 5;
  Eigen::MatrixXd f(days * period, 1);
  for (Eigen::Index d = 0; d < days; ++d) {
    for (Eigen::Index s = 0; s < period; ++s) f(d * period + s, 0) = z(rng);
    const double x4 = f(d * period + 3, 0);
    f(d * period + 4, 0) = 0.6 * x4 + 0.8 * z(rng);
  }
  const auto m = focus::fit_cross_slot_map(f, focus::slot_rows(3, period, days * period),
                                           focus::slot_rows(4, period, days * period));
  EXPECT_NEAR(m(0, 0), 0.6, 0.15);
}

TEST(CrossSlot, Preconditions) {
  const Eigen::MatrixXd f = Eigen::MatrixXd::Random(10, 2);
  EXPECT_THROW(focus::fit_cross_slot_map(f, {0, 1}, {2, 3}), focus::Error);
  EXPECT_THROW(focus::fit_cross_slot_map(f, {0, 1, 2}, {2, 3}), focus::Error);
  EXPECT_THROW(focus::fit_cross_slot_map(f, {0, 1, 20}, {2, 3, 4}), focus::Error);
}

TEST(Aic, PenaltyTerm) {
  focus::VarDynamics dyn = scalar_dyn(0.5);
  dyn.innovation_cov(0, 0) = std::exp(1.0);
  dyn.order = 2;
  dyn.coef.push_back(Eigen::MatrixXd::Zero(1, 1));
  EXPECT_NEAR(focus::aic(dyn, 100), 1.0 + 4.0 / 100.0, 1e-14);
}

}  // namespace
