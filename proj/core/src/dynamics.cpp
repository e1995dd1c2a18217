#include "focus/dynamics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "focus/errors.hpp"
#include "focus/linalg.hpp"

namespace focus {

Eigen::MatrixXd VarDynamics::companion() const {
  const Eigen::Index r = dim();
  const Eigen::Index p = order;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(r * p, r * p);
  for (Eigen::Index k = 0; k < p; ++k) {
    c.block(0, k * r, r, r) = coef[static_cast<std::size_t>(k)];
  }
  if (p > 1) c.block(r, 0, r * (p - 1), r * (p - 1)).setIdentity();
  return c;
}

VarDynamics fit_var(const Eigen::MatrixXd& factors, int order) {
  const Eigen::Index t_len = factors.rows();
  const Eigen::Index r = factors.cols();
  if (order < 1) throw Error(ErrorCode::kInvalidArgument, "VAR order must be at least 1");
  if (r < 1) throw Error(ErrorCode::kInvalidArgument, "VAR needs at least one series");
  const Eigen::Index p = order;
  if (t_len <= p * r + 1) {
    throw Error(ErrorCode::kTooShort, "VAR(" + std::to_string(p) + ") on " +
                                          std::to_string(r) + " series needs T > " +
                                          std::to_string(p * r + 1));
  }

  const Eigen::Index n = t_len - p;
  Eigen::MatrixXd x(n, r * p);
  for (Eigen::Index k = 0; k < p; ++k) {
    x.middleCols(k * r, r) = factors.middleRows(p - 1 - k, n);
  }
  const Eigen::MatrixXd y = factors.bottomRows(n);

  const Eigen::MatrixXd gram = x.transpose() * x;
  // Regressors with RMS below 1e-10 are numerically zero (e.g. the residual of
  // a detrended constant series).
  const double rms_floor = 1e-20 * static_cast<double>(n);
  if (gram.diagonal().maxCoeff() <= rms_floor ||
      condition_number_symmetric(gram) > kMaxGramCondition) {
    throw Error(ErrorCode::kSingularGram, "VAR regressor Gram matrix is ill-conditioned");
  }
  const Eigen::MatrixXd b = x.colPivHouseholderQr().solve(y);  // rp x r
  const Eigen::MatrixXd resid = y - x * b;

  VarDynamics dyn;
  dyn.order = order;
  dyn.n_obs = n;
  for (Eigen::Index k = 0; k < p; ++k) {
    dyn.coef.push_back(b.middleRows(k * r, r).transpose());
  }
  Eigen::MatrixXd cov = resid.transpose() * resid / static_cast<double>(n);
  dyn.innovation_cov = 0.5 * (cov + cov.transpose());
  dyn.spectral_radius = spectral_radius(dyn.companion());
  return dyn;
}

double aic(const VarDynamics& dyn, Eigen::Index n_times) {
  const double r = static_cast<double>(dyn.dim());
  const double det = dyn.innovation_cov.determinant();
  const double log_det = det > 0.0 ? std::log(det) : -std::numeric_limits<double>::infinity();
  return log_det + 2.0 * dyn.order * r * r / static_cast<double>(n_times);
}

int select_order(const Eigen::MatrixXd& factors, int max_order) {
  if (max_order < 1) throw Error(ErrorCode::kInvalidArgument, "max_order must be at least 1");
  if (max_order * factors.cols() + 1 >= factors.rows()) {
    throw Error(ErrorCode::kTooShort, "max_order * r + 1 must be below T");
  }
  // Every order is scored on the same sample, the last T - max_order rows.
  const Eigen::Index t_len = factors.rows();
  int best = 1;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= max_order; ++p) {
    const VarDynamics dyn = fit_var(factors.bottomRows(t_len - (max_order - p)), p);
    const double value = aic(dyn, t_len - max_order);
    if (value < best_aic) {
      best_aic = value;
      best = p;
    }
  }
  return best;
}

Eigen::VectorXd forecast_factors(const VarDynamics& dyn, const Eigen::MatrixXd& factors,
                                 int horizon) {
  if (horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be at least 1");
  const Eigen::Index r = dyn.dim();
  const Eigen::Index p = dyn.order;
  if (factors.cols() != r || factors.rows() < p) {
    throw Error(ErrorCode::kInvalidArgument, "factor history does not match the VAR");
  }
  // Stacked state (F_T, F_{T-1}, ..., F_{T-p+1}).
  Eigen::VectorXd state(r * p);
  for (Eigen::Index k = 0; k < p; ++k) {
    state.segment(k * r, r) = factors.row(factors.rows() - 1 - k).transpose();
  }
  if (p == 1) {
    return matrix_power(dyn.coef.front(), horizon) * state;
  }
  const Eigen::MatrixXd c = dyn.companion();
  for (int h = 0; h < horizon; ++h) state = c * state;
  return state.head(r);
}

double forecast(const FactorModelFit& fit, const VarDynamics& dyn, Eigen::Index unit,
                int horizon) {
  if (unit < 0 || unit >= fit.n_units()) {
    throw Error(ErrorCode::kInvalidArgument, "unit index out of range");
  }
  if (!fit.loading_ok[static_cast<std::size_t>(unit)]) {
    throw Error(ErrorCode::kDegenerateUnit, "unit " + std::to_string(unit) +
                                                " has no usable loading");
  }
  return fit.loadings.row(unit).dot(forecast_factors(dyn, fit.factors, horizon));
}

std::vector<double> matrix_power_norms(const Eigen::MatrixXd& a, int n_max) {
  if (n_max < 1) throw Error(ErrorCode::kInvalidArgument, "n_max must be at least 1");
  std::vector<double> norms;
  norms.reserve(static_cast<std::size_t>(n_max));
  Eigen::MatrixXd power = a;
  for (int n = 1; n <= n_max; ++n) {
    norms.push_back(spectral_norm(power));
    if (n < n_max) power = power * a;
  }
  return norms;
}

Eigen::MatrixXd fit_cross_slot_map(const Eigen::MatrixXd& factors,
                                   const std::vector<Eigen::Index>& source_rows,
                                   const std::vector<Eigen::Index>& target_rows) {
  const Eigen::Index r = factors.cols();
  const auto k = static_cast<Eigen::Index>(source_rows.size());
  if (source_rows.size() != target_rows.size()) {
    throw Error(ErrorCode::kInvalidArgument, "source and target slot counts differ");
  }
  if (k < r + 1) {
    throw Error(ErrorCode::kTooShort, "cross-slot map needs at least r + 1 pairs");
  }
  Eigen::MatrixXd src(k, r);
  Eigen::MatrixXd tgt(k, r);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index s = source_rows[static_cast<std::size_t>(j)];
    const Eigen::Index t = target_rows[static_cast<std::size_t>(j)];
    if (s < 0 || s >= factors.rows() || t < 0 || t >= factors.rows()) {
      throw Error(ErrorCode::kInvalidArgument, "slot index outside the factor rows");
    }
    src.row(j) = factors.row(s);
    tgt.row(j) = factors.row(t);
  }
  const Eigen::MatrixXd gram = src.transpose() * src;
  if (condition_number_symmetric(gram) > kMaxGramCondition) {
    throw Error(ErrorCode::kSingularGram, "source-slot Gram matrix is ill-conditioned");
  }
  // M' = gram^{-1} src' tgt
  return gram.ldlt().solve(src.transpose() * tgt).transpose();
}

std::vector<Eigen::Index> slot_rows(Eigen::Index slot, Eigen::Index period, Eigen::Index n_times) {
  if (period < 1 || slot < 0) {
    throw Error(ErrorCode::kInvalidArgument, "slot period must be positive and slot nonnegative");
  }
  std::vector<Eigen::Index> rows;
  for (Eigen::Index t = slot; t < n_times; t += period) rows.push_back(t);
  return rows;
}

}  // namespace focus
