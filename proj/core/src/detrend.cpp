#include "focus/detrend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "focus/errors.hpp"

namespace focus {

namespace {

constexpr int kDegree = 3;

// Cox-de Boor evaluation of all basis functions at x.
Eigen::RowVectorXd bspline_row(double x, const std::vector<double>& knots, Eigen::Index dim) {
  const auto n_knots = static_cast<Eigen::Index>(knots.size());
  // Degree-0 indicators on [k_j, k_{j+1}); the right end of the data range
  // falls inside the extended knot span, so no special-casing is needed.
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n_knots - 1);
  for (Eigen::Index j = 0; j + 1 < n_knots; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    if (knots[uj] <= x && x < knots[uj + 1]) b(j) = 1.0;
  }
  for (int d = 1; d <= kDegree; ++d) {
    for (Eigen::Index j = 0; j + d + 1 < n_knots; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      const double left = (x - knots[uj]) / (knots[uj + d] - knots[uj]);
      const double right = (knots[uj + d + 1] - x) / (knots[uj + d + 1] - knots[uj + 1]);
      b(j) = left * b(j) + right * b(j + 1);
    }
  }
  return b.head(dim).transpose();
}

}  // namespace

PSplineBasis::PSplineBasis(Eigen::Index n_times, Eigen::Index interior_knots) {
  if (n_times < 4) throw Error(ErrorCode::kTooShort, "spline smoothing needs T >= 4");
  const Eigen::Index k = interior_knots > 0 ? interior_knots : (n_times + 3) / 4;
  const double lo = 1.0;
  const double hi = static_cast<double>(n_times);
  const double dx = (hi - lo) / static_cast<double>(k + 1);

  std::vector<double> knots;
  for (Eigen::Index j = -kDegree; j <= k + 1 + kDegree; ++j) {
    knots.push_back(lo + static_cast<double>(j) * dx);
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(knots.size()) - kDegree - 1;

  basis_.resize(n_times, dim);
  for (Eigen::Index t = 0; t < n_times; ++t) {
    basis_.row(t) = bspline_row(static_cast<double>(t + 1), knots, dim);
  }

  Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(dim - 2, dim);
  for (Eigen::Index j = 0; j + 2 < dim; ++j) {
    diff(j, j) = 1.0;
    diff(j, j + 1) = -2.0;
    diff(j, j + 2) = 1.0;
  }
  penalty_ = diff.transpose() * diff;
}

double PSplineBasis::penalty_scale() const {
  return (basis_.transpose() * basis_).trace() / penalty_.trace();
}

Eigen::VectorXd PSplineBasis::solve(const Eigen::VectorXd& series, const Eigen::VectorXd& weights,
                                    double lambda) const {
  const Eigen::Index n = n_times();
  if (series.size() != n || weights.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "series length does not match the basis");
  }
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "penalty must be >= 0");

  if (std::isinf(lambda)) {
    // Weighted least-squares line in t.
    Eigen::MatrixXd design(n, 2);
    design.col(0).setOnes();
    design.col(1) = Eigen::VectorXd::LinSpaced(n, 1.0, static_cast<double>(n));
    const Eigen::MatrixXd wd = weights.asDiagonal() * design;
    const Eigen::Vector2d coef = (design.transpose() * wd).ldlt().solve(wd.transpose() * series);
    return design * coef;
  }

  const Eigen::MatrixXd wb = weights.asDiagonal() * basis_;
  Eigen::MatrixXd lhs = basis_.transpose() * wb + lambda * penalty_;
  const Eigen::VectorXd rhs = wb.transpose() * series;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
  const Eigen::VectorXd d = ldlt.vectorD();
  const double d_max = d.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(d.minCoeff() > 1e-13 * d_max)) {
    throw Error(ErrorCode::kSingularSystem, "penalised spline system is singular");
  }
  return basis_ * ldlt.solve(rhs);
}

SplineFit fit_penalized_spline(std::span<const double> series, double penalty,
                               const SplineOptions& options) {
  const auto n = static_cast<Eigen::Index>(series.size());
  const PSplineBasis basis(n, options.interior_knots);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(series.data(), n);
  SplineFit fit;
  fit.fitted = basis.solve(y, Eigen::VectorXd::Ones(n), penalty);
  fit.residuals = y - fit.fitted;
  fit.penalty = penalty;
  fit.basis_dim = basis.dim();
  return fit;
}

std::vector<double> penalty_grid(const PSplineBasis& basis, const BlockCvOptions& options) {
  if (options.grid_points < 1 || !(options.grid_lo > 0.0) || !(options.grid_hi >= options.grid_lo)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid penalty grid");
  }
  const double scale = basis.penalty_scale();
  std::vector<double> grid;
  const double a = std::log10(options.grid_lo);
  const double b = std::log10(options.grid_hi);
  for (int k = 0; k < options.grid_points; ++k) {
    const double frac = options.grid_points == 1 ? 0.0 : static_cast<double>(k) / (options.grid_points - 1);
    grid.push_back(scale * std::pow(10.0, a + frac * (b - a)));
  }
  return grid;
}

PenaltyChoice tune_penalty_blockcv(std::span<const double> series, const BlockCvOptions& options) {
  const auto n = static_cast<Eigen::Index>(series.size());
  const int folds = options.folds;
  if (folds < 2) throw Error(ErrorCode::kInvalidArgument, "block CV needs at least 2 folds");
  if (n < 2 * folds) {
    throw Error(ErrorCode::kTooShort, "block CV needs T >= 2 * folds");
  }
  const Eigen::Index block = options.block > 0
                                 ? options.block
                                 : static_cast<Eigen::Index>(std::ceil(std::sqrt(static_cast<double>(n))));
  const Eigen::Index n_blocks = (n + block - 1) / block;
  if (n_blocks < folds) {
    throw Error(ErrorCode::kTooShort, std::to_string(n_blocks) + " blocks of size " +
                                          std::to_string(block) + " cannot form " +
                                          std::to_string(folds) + " folds");
  }

  // Time range [fold_start[k], fold_start[k + 1]) for each fold.
  std::vector<Eigen::Index> fold_start;
  for (int k = 0; k <= folds; ++k) {
    const Eigen::Index first_block = static_cast<Eigen::Index>(k) * n_blocks / folds;
    fold_start.push_back(std::min(first_block * block, n));
  }

  const PSplineBasis basis(n, options.interior_knots);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(series.data(), n);

  PenaltyChoice choice;
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : penalty_grid(basis, options)) {
    double total = 0.0;
    int scored = 0;
    for (int k = 1; k < folds; ++k) {
      const Eigen::Index train_end = fold_start[static_cast<std::size_t>(k)];
      const Eigen::Index test_end = fold_start[static_cast<std::size_t>(k) + 1];
      if (test_end <= train_end) continue;
      Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
      w.head(train_end).setOnes();
      const Eigen::VectorXd fitted = basis.solve(y, w, lambda);
      const Eigen::Index len = test_end - train_end;
      total += (y.segment(train_end, len) - fitted.segment(train_end, len)).squaredNorm() /
               static_cast<double>(len);
      ++scored;
    }
    const double score = total / static_cast<double>(std::max(scored, 1));
    choice.scores.emplace_back(lambda, score);
    // Ties go to the larger (smoother) penalty.
    if (score <= best) {
      best = score;
      choice.penalty = lambda;
    }
  }
  return choice;
}

Eigen::VectorXd DetrendResult::extrapolate(int horizon) const {
  if (horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be at least 1");
  const Eigen::Index t_len = trend.rows();
  const Eigen::VectorXd last = trend.row(t_len - 1).transpose();
  const Eigen::VectorXd slope = last - trend.row(t_len - 2).transpose();
  return last + static_cast<double>(horizon) * slope;
}

DetrendResult detrend_factors(const Eigen::MatrixXd& factors, const BlockCvOptions& options) {
  const Eigen::Index t_len = factors.rows();
  DetrendResult out;
  out.trend.resize(t_len, factors.cols());
  out.residual.resize(t_len, factors.cols());
  SplineOptions spline_options;
  spline_options.interior_knots = options.interior_knots;
  for (Eigen::Index j = 0; j < factors.cols(); ++j) {
    const Eigen::VectorXd column = factors.col(j);
    const std::span<const double> view(column.data(), static_cast<std::size_t>(t_len));
    PenaltyChoice choice = tune_penalty_blockcv(view, options);
    SplineFit fit = fit_penalized_spline(view, choice.penalty, spline_options);
    fit.cv_scores = std::move(choice.scores);
    out.trend.col(j) = fit.fitted;
    out.residual.col(j) = column - fit.fitted;
    out.fits.push_back(std::move(fit));
  }
  return out;
}

}  // namespace focus
