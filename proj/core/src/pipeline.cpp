#include "focus/pipeline.hpp"

#include <cmath>
#include <limits>

#include "focus/errors.hpp"

namespace focus {

FocusModel fit_focus(const Panel& panel, const FocusOptions& options) {
  FocusModel model;
  model.fit = fit_factor_model(panel, options.rank, options.transpose, options.factor);
  if (options.detrend) {
    model.trend = detrend_factors(model.fit.factors, options.detrend_options);
    model.var_series = model.trend->residual;
  } else {
    model.var_series = model.fit.factors;
  }
  const int order = options.max_order > 1 ? select_order(model.var_series, options.max_order) : 1;
  model.dynamics = fit_var(model.var_series, order);
  return model;
}

Eigen::VectorXd forecast_factor_path(const FocusModel& model, int horizon) {
  Eigen::VectorXd f = forecast_factors(model.dynamics, model.var_series, horizon);
  if (model.trend) f += model.trend->extrapolate(horizon);
  return f;
}

Eigen::VectorXd point_forecasts(const FocusModel& model, int horizon) {
  const Eigen::VectorXd f = forecast_factor_path(model, horizon);
  Eigen::VectorXd out = model.fit.loadings * f;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (!model.fit.loading_ok[static_cast<std::size_t>(i)]) {
      out(i) = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

bool ForecastResult::has_ci() const { return std::isfinite(ci_lower) && std::isfinite(ci_upper); }

VarianceComponents unit_variance(const Panel& panel, const FocusModel& model,
                                 const OverlapStats& stats, Eigen::Index unit, int horizon,
                                 const VarianceOptions& options) {
  const Eigen::MatrixXd* series = model.trend ? &model.var_series : nullptr;
  return forecast_variance(panel, model.fit, model.dynamics, stats, unit, horizon, options,
                           series);
}

std::vector<ForecastResult> forecast_with_ci(const Panel& panel, const FocusModel& model,
                                             const std::vector<int>& horizons, double alpha,
                                             const FocusOptions& options) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be in (0, 1)");
  }
  for (int h : horizons) {
    if (h < 1) throw Error(ErrorCode::kInvalidArgument, "horizons must be at least 1");
  }
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  const Eigen::Index n = panel.n_units();
  const Eigen::Index t_len = panel.n_times();
  const double delta = std::sqrt(static_cast<double>(std::min(n, t_len)));

  std::optional<OverlapStats> stats;
  if (model.dynamics.order == 1) {
    try {
      stats = compute_overlap_stats(panel, options.quad_samples, options.overlap);
    } catch (const Error& e) {
      if (e.category() != ErrorCategory::kNumerical) throw;
    }
  }

  std::vector<ForecastResult> rows;
  for (int h : horizons) {
    const Eigen::VectorXd points = point_forecasts(model, h);
    for (Eigen::Index i = 0; i < n; ++i) {
      ForecastResult row;
      row.unit = i;
      row.horizon = h;
      row.point = points(i);
      row.std_error = kNan;
      row.ci_lower = kNan;
      row.ci_upper = kNan;
      row.sigma_sq = kNan;
      if (!model.dynamics.stable()) row.flags.emplace_back(kFlagUnstable);
      if (!model.fit.loading_ok[static_cast<std::size_t>(i)]) {
        row.flags.emplace_back(kFlagDegenerate);
        rows.push_back(std::move(row));
        continue;
      }
      bool ok = stats.has_value();
      if (ok) {
        try {
          const VarianceComponents v = unit_variance(panel, model, *stats, i, h, options.variance);
          const Interval ci = confidence_interval(row.point, v.sigma_sq, n, t_len, alpha);
          row.sigma_sq = v.sigma_sq;
          row.std_error = std::sqrt(v.sigma_sq) / delta;
          row.ci_lower = ci.lower;
          row.ci_upper = ci.upper;
        } catch (const Error& e) {
          if (e.category() != ErrorCategory::kNumerical) throw;
          ok = false;
        }
      }
      if (!ok) row.flags.emplace_back(kFlagNoCi);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace focus
