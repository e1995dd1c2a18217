#ifndef FOCUS_FACTORS_HPP_
#define FOCUS_FACTORS_HPP_

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "focus/linalg.hpp"
#include "focus/panel.hpp"

namespace focus {

// Overlap-averaged second moments of the panel columns. Pairs of columns that
// are never jointly observed are set to 0 and listed in zero_filled (s <= t).
struct PairwiseCovariance {
  Eigen::MatrixXd sigma_hat;  // T x T
  std::vector<std::pair<Eigen::Index, Eigen::Index>> zero_filled;
};

PairwiseCovariance pairwise_covariance(const Panel& panel, const OverlapIndex& index);
PairwiseCovariance pairwise_covariance(const Panel& panel);

// sqrt(T) times the top-r eigenvectors of sigma_hat / T, with the sign of each
// column fixed so its largest-magnitude entry is positive.
Eigen::MatrixXd estimate_factors(const PairwiseCovariance& cov, Eigen::Index rank,
                                 EigenMethod method = EigenMethod::kAuto);

struct LoadingEstimate {
  Eigen::MatrixXd loadings;  // N x r
  std::vector<bool> ok;      // false: too few observations or ill-conditioned Gram
};

inline constexpr double kMaxGramCondition = 1e12;

// Per-unit least squares of observed outcomes on the factors at observed times.
LoadingEstimate estimate_loadings(const Panel& panel, const Eigen::MatrixXd& factors);

class RankMethod {
 public:
  enum class Kind { kFixed, kExplainedVariance, kEigenRatio };

  static RankMethod fixed(Eigen::Index rank) { return RankMethod(Kind::kFixed, rank, 0.0); }
  static RankMethod explained_variance(double threshold) {
    return RankMethod(Kind::kExplainedVariance, 0, threshold);
  }
  static RankMethod eigen_ratio() { return RankMethod(Kind::kEigenRatio, 0, 0.0); }

  Kind kind() const { return kind_; }
  Eigen::Index rank() const { return rank_; }
  double threshold() const { return threshold_; }

 private:
  RankMethod(Kind kind, Eigen::Index rank, double threshold)
      : kind_(kind), rank_(rank), threshold_(threshold) {}

  Kind kind_;
  Eigen::Index rank_;
  double threshold_;
};

// Picks the number of factors from a nonincreasing spectrum. Negative
// eigenvalues (possible for pairwise-complete Sigma-hat) count as zero
// variance. eigen_ratio searches k <= eigenvalues.size() / 2.
Eigen::Index select_rank(const Eigen::VectorXd& eigenvalues, const RankMethod& method);

struct FactorModelFit {
  Eigen::MatrixXd factors;    // T x r, (1/T) F'F = I
  Eigen::MatrixXd loadings;   // N x r
  Eigen::Index rank = 0;
  Eigen::VectorXd eigenvalues;  // spectrum of the decomposed second-moment matrix, scaled
  std::vector<bool> loading_ok;  // per unit
  std::vector<bool> factor_ok;   // per time; only ever false in transposed mode
  std::vector<std::pair<Eigen::Index, Eigen::Index>> zero_filled;
  bool transposed = false;

  Eigen::Index n_units() const { return loadings.rows(); }
  Eigen::Index n_times() const { return factors.rows(); }

  // Lambda_i' F_t for every observed-or-not entry.
  Eigen::MatrixXd fitted_values() const { return loadings * factors.transpose(); }
};

struct FactorOptions {
  EigenMethod eigen_method = EigenMethod::kAuto;
};

// The full factor step. With transpose = true the covariance is taken across
// units instead of time and the results are mapped back, so callers always
// get time-indexed factors normalised to (1/T) F'F = I.
FactorModelFit fit_factor_model(const Panel& panel, const RankMethod& rank_method,
                                bool transpose = false, const FactorOptions& options = {});

}  // namespace focus

#endif  // FOCUS_FACTORS_HPP_
