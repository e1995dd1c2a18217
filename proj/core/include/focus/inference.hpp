#ifndef FOCUS_INFERENCE_HPP_
#define FOCUS_INFERENCE_HPP_

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "focus/dynamics.hpp"
#include "focus/factors.hpp"
#include "focus/panel.hpp"

namespace focus {

// Plug-in ingredients of the forecast variance for one unit. The first block
// is estimated from data; the second is assembled from the first by
// assemble_derived() for a given (F_T, Lambda_i).
struct VariancePieces {
  double sigma_eps_sq = 0.0;
  Eigen::MatrixXd sigma_lambda;  // r x r, (1/N) sum Lambda_i Lambda_i'
  Eigen::MatrixXd sigma_f;       // r x r, (1/T) sum F_t F_t'
  Eigen::MatrixXd sigma_f_i;     // r x r, (1/T) sum W_it F_t F_t'
  Eigen::MatrixXd sigma_eta;     // r x r
  Eigen::MatrixXd v_lambda;      // r^2 x r^2, fourth moment of vec(Lambda Lambda' - Sigma_Lambda)
  double omega1 = 1.0;
  double omega2 = 1.0;
  double omega3 = 1.0;

  // Overrides of the iid forms sigma_eps^2 Sigma_Lambda^{-1} and
  // sigma_eps^2 Sigma_{F,i}^{-1}; set by the robust (HAC) estimator.
  Eigen::MatrixXd sigma_f_obs_override;
  Eigen::MatrixXd sigma_lambda_i_obs_override;

  Eigen::MatrixXd sigma_f_obs;
  Eigen::MatrixXd sigma_f_t_miss;
  Eigen::MatrixXd sigma_lambda_i_obs;
  Eigen::MatrixXd sigma_lambda_i_miss;
  Eigen::MatrixXd sigma_cov_miss;  // F-Lambda cross term, not symmetric in general
};

// Fills the derived matrices of `pieces` for factor value f_last and loading
// lambda_i.
void assemble_derived(VariancePieces& pieces, const Eigen::VectorXd& f_last,
                      const Eigen::VectorXd& lambda_i);

struct VarianceOptions {
  // Robust residual-moment terms: Bartlett-kernel long-run variance over time
  // for the loading term, heteroskedasticity-robust cross-section for the
  // factor term.
  bool hac = false;
  // Negative picks floor(4 (T/100)^{2/9}).
  int hac_bandwidth = -1;
};

// Estimates every piece for `unit` from a fitted model. Supports VAR(1) only.
VariancePieces estimate_variance_pieces(const Panel& panel, const FactorModelFit& fit,
                                        const VarDynamics& dyn, const OverlapStats& stats,
                                        Eigen::Index unit, const VarianceOptions& options = {});

// Factor-estimation part of the forecast variance at horizon h.
double xi_squared(const VariancePieces& pieces, int horizon, const Eigen::VectorXd& f_last,
                  const Eigen::VectorXd& lambda_i, const Eigen::MatrixXd& a, Eigen::Index n_units,
                  Eigen::Index n_times);

// Coefficient-estimation (forecasting) part of the forecast variance.
double tau_squared(const VariancePieces& pieces, int horizon, const Eigen::VectorXd& f_last,
                   const Eigen::VectorXd& lambda_i, const Eigen::MatrixXd& a, Eigen::Index n_units,
                   Eigen::Index n_times);

struct VarianceComponents {
  double xi_sq = 0.0;
  double tau_sq = 0.0;
  double sigma_sq = 0.0;
  VariancePieces pieces;
};

// var_series is the factor series the VAR was fitted on when it differs from
// fit.factors (the stochastic part after detrending); Sigma_F and F_T are then
// taken from it.
VarianceComponents forecast_variance(const Panel& panel, const FactorModelFit& fit,
                                     const VarDynamics& dyn, const OverlapStats& stats,
                                     Eigen::Index unit, int horizon,
                                     const VarianceOptions& options = {},
                                     const Eigen::MatrixXd* var_series = nullptr);

// Newey-West long-run covariance of the rows of z (T x k) with Bartlett
// weights 1 - l / (L + 1), l = 1..L.
Eigen::MatrixXd newey_west(const Eigen::MatrixXd& z, int bandwidth);

int default_hac_bandwidth(Eigen::Index n_times);

// Closed forms for one AR(1) factor.
struct OneFactorParams {
  double phi = 0.5;
  double sigma_eta = 0.5;
  double sigma_f = 0.0;  // <= 0: derived as sigma_eta / sqrt(1 - phi^2)
  double sigma_lambda = 0.5;
  double sigma_eps = 0.1;
  // E[(Lambda^2 / sigma_Lambda^2 - 1)^2]; 2 for Gaussian loadings.
  double loading_kurtosis_term = 2.0;

  double sigma_f_sq() const;
};

enum class OneFactorPattern { kMcar, kStaggered };

struct OneFactorVariance {
  double xi_sq = 0.0;
  double tau_sq = 0.0;
};

// p_obs is the MCAR observation probability (ignored for staggered adoption).
OneFactorVariance one_factor_variance(const OneFactorParams& params, OneFactorPattern pattern,
                                      double p_obs, double lambda_i, double f_last,
                                      Eigen::Index n_units, Eigen::Index n_times, int horizon);

// Pieces that make the general formulas reproduce the one-factor closed forms.
VariancePieces one_factor_pieces(const OneFactorParams& params, OneFactorPattern pattern,
                                 double p_obs);

// Standard normal quantile, accurate to double precision on (0, 1).
double normal_quantile(double prob);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

// point -/+ z_{1 - alpha/2} sqrt(sigma_sq) / min(sqrt N, sqrt T).
Interval confidence_interval(double point, double sigma_sq, Eigen::Index n_units,
                             Eigen::Index n_times, double alpha);

// Named (label, matrix) list for the diagnostic dump.
std::vector<std::pair<std::string, Eigen::MatrixXd>> named_pieces(const VariancePieces& pieces);

}  // namespace focus

#endif  // FOCUS_INFERENCE_HPP_
