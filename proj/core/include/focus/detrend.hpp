#ifndef FOCUS_DETREND_HPP_
#define FOCUS_DETREND_HPP_

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace focus {

// Cubic B-spline basis on equally spaced knots over t = 1..T, extended three
// knot spacings past both ends so the Greville abscissae are equally spaced
// and linear trends sit in the null space of the difference penalty.
class PSplineBasis {
 public:
  // interior_knots == 0 picks ceil(T / 4).
  PSplineBasis(Eigen::Index n_times, Eigen::Index interior_knots = 0);

  Eigen::Index n_times() const { return basis_.rows(); }
  Eigen::Index dim() const { return basis_.cols(); }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::MatrixXd& penalty_matrix() const { return penalty_; }

  // trace(B'B) / trace(D'D); puts lambda on a basis-independent scale.
  double penalty_scale() const;

  // Minimises sum_t w_t (y_t - (Bc)_t)^2 + lambda c'Pc. lambda = +inf returns
  // the weighted least-squares line. Throws SingularSystem when the system
  // is singular (only possible at lambda = 0).
  Eigen::VectorXd solve(const Eigen::VectorXd& series, const Eigen::VectorXd& weights,
                        double lambda) const;

 private:
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd penalty_;
};

struct SplineFit {
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  double penalty = 0.0;
  Eigen::Index basis_dim = 0;
  std::vector<std::pair<double, double>> cv_scores;  // (lambda, mean held-out MSE)
};

struct SplineOptions {
  Eigen::Index interior_knots = 0;  // 0: ceil(T / 4)
};

SplineFit fit_penalized_spline(std::span<const double> series, double penalty,
                               const SplineOptions& options = {});

struct BlockCvOptions {
  int folds = 10;
  Eigen::Index block = 0;  // 0: ceil(sqrt(T))
  int grid_points = 25;
  double grid_lo = 1e-4;
  double grid_hi = 1e4;
  Eigen::Index interior_knots = 0;
};

struct PenaltyChoice {
  double penalty = 0.0;
  std::vector<std::pair<double, double>> scores;
};

// Forward-chained block cross-validation: time is cut into blocks of size
// `block`, blocks into `folds` chronological folds, and fold k is scored by a
// fit on folds 1..k-1. Throws TooShort when fewer than `folds` blocks exist.
PenaltyChoice tune_penalty_blockcv(std::span<const double> series,
                                   const BlockCvOptions& options = {});

// The log-spaced grid (times the basis scale) that tune_penalty_blockcv scans.
std::vector<double> penalty_grid(const PSplineBasis& basis, const BlockCvOptions& options);

struct DetrendResult {
  Eigen::MatrixXd trend;     // T x r
  Eigen::MatrixXd residual;  // T x r
  std::vector<SplineFit> fits;

  // Trend continued linearly past T with the slope of its last step.
  Eigen::VectorXd extrapolate(int horizon) const;
};

DetrendResult detrend_factors(const Eigen::MatrixXd& factors,
                              const BlockCvOptions& options = {});

}  // namespace focus

#endif  // FOCUS_DETREND_HPP_
