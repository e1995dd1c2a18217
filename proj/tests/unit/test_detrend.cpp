#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "focus/detrend.hpp"
#include "focus/errors.hpp"
#include "test_util.hpp"

namespace {

std::vector<double> series_of(Eigen::Index t_len, double (*f)(double, double)) {
  std::vector<double> y;
  for (Eigen::Index t = 1; t <= t_len; ++t) {
    y.push_back(f(static_cast<double>(t), static_cast<double>(t_len)));
  }
  return y;
}

TEST(Spline, LinearSeriesUnpenalised) {
  const auto y = series_of(60, [](double t, double) { return 3.0 - 0.2 * t; });
  for (double lambda : {0.1, 10.0, 1e6}) {
    const auto fit = focus::fit_penalized_spline(y, lambda);
    EXPECT_LT(fit.residuals.cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Spline, ConstantSeries) {
  const std::vector<double> y(40, 1.75);
  const auto fit = focus::fit_penalized_spline(y, 5.0);
  EXPECT_LT(fit.residuals.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((fit.fitted.array() - 1.75).abs().maxCoeff(), 1e-10);
}

TEST(Spline, QuadraticTrendModeratePenalty) {
  const auto y = series_of(256, [](double t, double n) { return 2.0 * t * t / (n * n); });
  const auto fit = focus::fit_penalized_spline(y, 1.0);
  EXPECT_LT(fit.residuals.cwiseAbs().maxCoeff(), 0.05);
}

TEST(Spline, ExactDecompositionAndMonotoneRss) {
  std::mt19937_64 rng(1);
  const Eigen::VectorXd noise = focus::test::gaussian(100, 1, rng);
  std::vector<double> y(noise.data(), noise.data() + noise.size());
  for (std::size_t t = 0; t < y.size(); ++t) y[t] += std::sin(0.1 * static_cast<double>(t));
  const focus::PSplineBasis basis(100);
  double previous = -1.0;
  for (double lambda : focus::penalty_grid(basis, {})) {
    const auto fit = focus::fit_penalized_spline(y, lambda);
    for (std::size_t t = 0; t < y.size(); ++t) {
      EXPECT_NEAR(fit.fitted(static_cast<Eigen::Index>(t)) + fit.residuals(static_cast<Eigen::Index>(t)), y[t], 1e-12);
    }
    const double rss = fit.residuals.squaredNorm();
    EXPECT_GE(rss, previous - 1e-9 * std::abs(previous));
    previous = rss;
  }
}

TEST(Spline, BasisShape) {
  const focus::PSplineBasis basis(40);
  EXPECT_EQ(basis.n_times(), 40);
  EXPECT_EQ(basis.dim(), 10 + 4);  // 10 interior knots, cubic
  // Partition of unity.
  EXPECT_LT((basis.basis().rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  EXPECT_GT(basis.penalty_scale(), 0.0);
}

TEST(BlockCv, TooFewBlocks) {
  const std::vector<double> y(20, 0.0);
  try {
    focus::tune_penalty_blockcv(y);
    FAIL();
  } catch (const focus::Error& e) {
    EXPECT_EQ(e.code(), focus::ErrorCode::kTooShort);
  }
}

TEST(BlockCv, NoiselessQuadraticFitsWell) {
  const auto y = series_of(144, [](double t, double n) { return 2.0 * t * t / (n * n); });
  const auto choice = focus::tune_penalty_blockcv(y);
  EXPECT_EQ(choice.scores.size(), 25u);
  const auto fit = focus::fit_penalized_spline(y, choice.penalty);
  EXPECT_LT(fit.residuals.squaredNorm() / 144.0, 1e-4);
}

TEST(BlockCv, WhiteNoiseSmoothsHard) {
  const focus::PSplineBasis basis(144);
  const auto grid = focus::penalty_grid(basis, {});
  std::vector<double> picks;
  for (std::uint64_t seed = 0; seed < 21; ++seed) {
    std::mt19937_64 rng(seed);
    const Eigen::VectorXd z = focus::test::gaussian(144, 1, rng);
    picks.push_back(focus::tune_penalty_blockcv(std::vector<double>(z.data(), z.data() + 144)).penalty);
  }
  std::nth_element(picks.begin(), picks.begin() + 10, picks.end());
  EXPECT_GE(picks[10], grid[grid.size() * 3 / 4]);
}

TEST(Detrend, DecompositionAndExtrapolation) {
  Eigen::MatrixXd f(121, 2);
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd z = focus::test::gaussian(121, 2, rng, 0.1);
  for (Eigen::Index t = 0; t < 121; ++t) {
    f(t, 0) = 0.02 * static_cast<double>(t) + z(t, 0);
    f(t, 1) = z(t, 1);
  }
  const auto d = focus::detrend_factors(f);
  EXPECT_LT((d.trend + d.residual - f).cwiseAbs().maxCoeff(), 1e-14);
  ASSERT_EQ(d.fits.size(), 2u);
  for (int h : {1, 3}) {
    const Eigen::VectorXd e = d.extrapolate(h);
    const Eigen::RowVectorXd slope = d.trend.row(120) - d.trend.row(119);
    EXPECT_TRUE(e.isApprox((d.trend.row(120) + h * slope).transpose(), 1e-12));
  }
  const double mean = d.residual.col(0).mean();
  const double sd = std::sqrt((d.residual.col(0).array() - mean).square().mean());
  EXPECT_LT(std::abs(mean), 3.0 * sd / std::sqrt(121.0));
}

}  // namespace
