#ifndef FOCUS_PIPELINE_HPP_
#define FOCUS_PIPELINE_HPP_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "focus/detrend.hpp"
#include "focus/dynamics.hpp"
#include "focus/factors.hpp"
#include "focus/inference.hpp"
#include "focus/panel.hpp"

namespace focus {

struct FocusOptions {
  RankMethod rank = RankMethod::fixed(1);
  bool transpose = false;
  FactorOptions factor;

  // Split each factor into a penalised-spline trend and a stochastic part and
  // fit the VAR on the latter.
  bool detrend = false;
  BlockCvOptions detrend_options;

  // 1 fits a VAR(1); larger values select the order by AIC.
  int max_order = 1;

  VarianceOptions variance;
  std::size_t quad_samples = 0;
  OverlapStatsOptions overlap;
};

// Everything the forecast step needs.
struct FocusModel {
  FactorModelFit fit;
  std::optional<DetrendResult> trend;
  Eigen::MatrixXd var_series;  // fit.factors, or their stochastic part
  VarDynamics dynamics;
};

FocusModel fit_focus(const Panel& panel, const FocusOptions& options = {});

// F_{T+h|T}: VAR forecast of the stochastic part plus the trend continuation.
Eigen::VectorXd forecast_factor_path(const FocusModel& model, int horizon);

// Point forecasts for every unit; NaN where the loading is flagged.
Eigen::VectorXd point_forecasts(const FocusModel& model, int horizon);

inline constexpr const char* kFlagDegenerate = "DEGENERATE";
inline constexpr const char* kFlagUnstable = "UNSTABLE";
inline constexpr const char* kFlagNoCi = "NO_CI";

struct ForecastResult {
  Eigen::Index unit = 0;
  int horizon = 1;
  double point = 0.0;
  // NaN when no interval is available.
  double std_error = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double sigma_sq = 0.0;
  std::vector<std::string> flags;

  bool has_ci() const;
};

// One row per (unit, horizon), horizons outermost. Degenerate units carry
// NaN point and interval; intervals are dropped (NO_CI) when the variance
// cannot be formed, e.g. for VAR orders above 1 or a zero overlap.
std::vector<ForecastResult> forecast_with_ci(const Panel& panel, const FocusModel& model,
                                             const std::vector<int>& horizons, double alpha,
                                             const FocusOptions& options = {});

// Variance components for one unit using the model's VAR series.
VarianceComponents unit_variance(const Panel& panel, const FocusModel& model,
                                 const OverlapStats& stats, Eigen::Index unit, int horizon,
                                 const VarianceOptions& options = {});

}  // namespace focus

#endif  // FOCUS_PIPELINE_HPP_
