#ifndef FOCUS_DYNAMICS_HPP_
#define FOCUS_DYNAMICS_HPP_

#include <vector>

#include <Eigen/Dense>

#include "focus/factors.hpp"

namespace focus {

// A VAR(p) without intercept, F_t = A_1 F_{t-1} + ... + A_p F_{t-p} + eta_t.
struct VarDynamics {
  std::vector<Eigen::MatrixXd> coef;  // A_1..A_p, each r x r
  Eigen::MatrixXd innovation_cov;     // residual covariance, divisor T - p
  int order = 1;
  double spectral_radius = 0.0;       // of the companion matrix
  Eigen::Index n_obs = 0;             // T - p

  Eigen::Index dim() const { return coef.empty() ? 0 : coef.front().rows(); }
  bool stable() const { return spectral_radius < 1.0; }

  // rp x rp companion matrix.
  Eigen::MatrixXd companion() const;
};

// OLS fit. Requires T > p r + 1; throws SingularGram when the stacked
// regressor Gram matrix has condition number above 1e12.
VarDynamics fit_var(const Eigen::MatrixXd& factors, int order);

// log det Sigma_eta(p) + 2 p r^2 / T.
double aic(const VarDynamics& dyn, Eigen::Index n_times);

// AIC-minimising order in 1..max_order, ties to the smaller order. All orders
// are fitted on the common sample that the largest order leaves.
int select_order(const Eigen::MatrixXd& factors, int max_order);

// Iterates the VAR h steps ahead from the last p rows of `factors`.
Eigen::VectorXd forecast_factors(const VarDynamics& dyn, const Eigen::MatrixXd& factors,
                                 int horizon);

// Lambda_i' F_{T+h|T}. Throws DegenerateUnit if the unit's loading is flagged.
double forecast(const FactorModelFit& fit, const VarDynamics& dyn, Eigen::Index unit,
                int horizon);

// Spectral norms ||A^n|| for n = 1..n_max.
std::vector<double> matrix_power_norms(const Eigen::MatrixXd& a, int n_max);

// OLS map M with target rows ~ M source rows, i.e.
// M = (F_tgt' F_src)(F_src' F_src)^{-1}. Indices are 0-based rows of `factors`.
Eigen::MatrixXd fit_cross_slot_map(const Eigen::MatrixXd& factors,
                                   const std::vector<Eigen::Index>& source_rows,
                                   const std::vector<Eigen::Index>& target_rows);

// Rows slot, slot + period, slot + 2 period, ... below n_times.
std::vector<Eigen::Index> slot_rows(Eigen::Index slot, Eigen::Index period, Eigen::Index n_times);

}  // namespace focus

#endif  // FOCUS_DYNAMICS_HPP_
