#include "focus/factors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "focus/errors.hpp"

namespace focus {

PairwiseCovariance pairwise_covariance(const Panel& panel, const OverlapIndex& index) {
  const Eigen::Index t_len = panel.n_times();
  if (index.counts.rows() != t_len || index.counts.cols() != t_len) {
    throw Error(ErrorCode::kInvalidArgument, "overlap index does not match the panel");
  }
  // Masked entries are stored as 0, so the plain cross product already sums
  // over Q_{s,t} only.
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(t_len, t_len);
  cross.selfadjointView<Eigen::Lower>().rankUpdate(panel.values().transpose());

  PairwiseCovariance out;
  out.sigma_hat.resize(t_len, t_len);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    for (Eigen::Index s = t; s < t_len; ++s) {
      const std::int64_t count = index.counts(s, t);
      double v = 0.0;
      if (count > 0) {
        v = cross(s, t) / static_cast<double>(count);
      } else {
        out.zero_filled.emplace_back(t, s);
      }
      out.sigma_hat(s, t) = v;
      out.sigma_hat(t, s) = v;
    }
  }
  return out;
}

PairwiseCovariance pairwise_covariance(const Panel& panel) {
  return pairwise_covariance(panel, build_overlap_index(panel));
}

namespace {

Eigen::MatrixXd scaled_eigenvectors(const EigenPairs& pairs, Eigen::Index rank,
                                    Eigen::Index dim) {
  Eigen::MatrixXd f = std::sqrt(static_cast<double>(dim)) * pairs.vectors.leftCols(rank);
  normalize_column_signs(f);
  return f;
}

void check_rank(Eigen::Index rank, Eigen::Index limit, const char* what) {
  if (rank < 1 || rank > limit) {
    throw Error(ErrorCode::kRankTooLarge, "rank " + std::to_string(rank) +
                                              " outside [1, " + std::to_string(limit) +
                                              "] (" + what + ")");
  }
}

}  // namespace

Eigen::MatrixXd estimate_factors(const PairwiseCovariance& cov, Eigen::Index rank,
                                 EigenMethod method) {
  const Eigen::Index t_len = cov.sigma_hat.rows();
  check_rank(rank, t_len, "number of time points");
  const EigenPairs pairs =
      top_eigenpairs(cov.sigma_hat / static_cast<double>(t_len), rank, method);
  return scaled_eigenvectors(pairs, rank, t_len);
}

LoadingEstimate estimate_loadings(const Panel& panel, const Eigen::MatrixXd& factors) {
  const Eigen::Index n = panel.n_units();
  const Eigen::Index t_len = panel.n_times();
  const Eigen::Index r = factors.cols();
  if (factors.rows() != t_len) {
    throw Error(ErrorCode::kInvalidArgument, "factor rows must equal the panel's T");
  }

  LoadingEstimate out;
  out.loadings = Eigen::MatrixXd::Zero(n, r);
  out.ok.assign(static_cast<std::size_t>(n), false);

  Eigen::MatrixXd gram(r, r);
  Eigen::VectorXd rhs(r);
  for (Eigen::Index i = 0; i < n; ++i) {
    gram.setZero();
    rhs.setZero();
    Eigen::Index n_obs = 0;
    for (Eigen::Index t = 0; t < t_len; ++t) {
      if (!panel.observed(i, t)) continue;
      ++n_obs;
      const auto f = factors.row(t).transpose();
      gram.selfadjointView<Eigen::Lower>().rankUpdate(f);
      rhs += f * panel.values()(i, t);
    }
    if (n_obs < r) continue;
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    if (condition_number_symmetric(gram) > kMaxGramCondition) continue;
    out.loadings.row(i) = gram.ldlt().solve(rhs).transpose();
    out.ok[static_cast<std::size_t>(i)] = true;
  }
  return out;
}

Eigen::Index select_rank(const Eigen::VectorXd& eigenvalues, const RankMethod& method) {
  const Eigen::Index len = eigenvalues.size();
  const Eigen::VectorXd positive = eigenvalues.cwiseMax(0.0);
  if (len == 0 || !(positive.maxCoeff() > 0.0)) {
    throw Error(ErrorCode::kAllZeroSpectrum, "no positive eigenvalue to select a rank from");
  }

  switch (method.kind()) {
    case RankMethod::Kind::kFixed:
      if (method.rank() < 1) {
        throw Error(ErrorCode::kInvalidArgument, "fixed rank must be at least 1");
      }
      return method.rank();

    case RankMethod::Kind::kExplainedVariance: {
      const double th = method.threshold();
      if (!(th > 0.0 && th <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "explained-variance threshold must lie in (0, 1]");
      }
      const double total = positive.sum();
      double cumulative = 0.0;
      for (Eigen::Index k = 0; k < len; ++k) {
        cumulative += positive(k);
        if (cumulative >= th * total - 1e-12 * total) return k + 1;
      }
      return len;
    }

    case RankMethod::Kind::kEigenRatio: {
      const Eigen::Index k_max = std::max<Eigen::Index>(1, len / 2);
      if (len < 2) return 1;
      Eigen::Index best = 1;
      double best_ratio = -std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 1; k <= k_max; ++k) {
        const double num = positive(k - 1);
        const double den = positive(k);
        double ratio;
        if (den > 0.0) {
          ratio = num / den;
        } else {
          ratio = num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        }
        if (ratio > best_ratio) {
          best_ratio = ratio;
          best = k;
        }
      }
      return best;
    }
  }
  return 1;
}

namespace {

struct OneSidedFit {
  Eigen::MatrixXd eigen_side;       // dim x r, sqrt(dim)-scaled eigenvectors
  Eigen::MatrixXd regression_side;  // other x r
  std::vector<bool> regression_ok;
  Eigen::VectorXd eigenvalues;
  Eigen::Index rank = 0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> zero_filled;
};

// Covariance across the panel's columns, eigenvectors, then row regressions.
OneSidedFit fit_one_side(const Panel& panel, const RankMethod& rank_method,
                         const FactorOptions& options) {
  const Eigen::Index dim = panel.n_times();
  const Eigen::Index other = panel.n_units();
  const Eigen::Index max_rank = std::min(dim, other);

  PairwiseCovariance cov = pairwise_covariance(panel);
  const Eigen::MatrixXd scaled = cov.sigma_hat / static_cast<double>(dim);

  EigenMethod method = options.eigen_method;
  if (method == EigenMethod::kAuto) {
    method = dim <= kFullEigenLimit ? EigenMethod::kFull : EigenMethod::kIterative;
  }

  OneSidedFit out;
  EigenPairs pairs;
  if (method == EigenMethod::kFull) {
    const Eigen::Index want = rank_method.kind() == RankMethod::Kind::kFixed
                                  ? std::min(rank_method.rank(), dim)
                                  : max_rank;
    pairs = top_eigenpairs(scaled, std::max<Eigen::Index>(want, 1), EigenMethod::kFull);
    out.eigenvalues = pairs.values.head(max_rank);
    out.rank = select_rank(out.eigenvalues, rank_method);
    check_rank(out.rank, max_rank, "min(N, T)");
    if (pairs.vectors.cols() < out.rank) {
      pairs = top_eigenpairs(scaled, out.rank, EigenMethod::kFull);
    }
  } else {
    // Only a leading block of the spectrum is available iteratively.
    const Eigen::Index probe =
        rank_method.kind() == RankMethod::Kind::kFixed
            ? std::min(rank_method.rank(), dim)
            : std::min<Eigen::Index>(max_rank, 64);
    pairs = top_eigenpairs(scaled, std::max<Eigen::Index>(probe, 1), EigenMethod::kIterative);
    out.eigenvalues = pairs.values;
    out.rank = select_rank(out.eigenvalues, rank_method);
    check_rank(out.rank, std::min(max_rank, pairs.vectors.cols()), "min(N, T)");
  }

  out.eigen_side = scaled_eigenvectors(pairs, out.rank, dim);
  LoadingEstimate reg = estimate_loadings(panel, out.eigen_side);
  out.regression_side = std::move(reg.loadings);
  out.regression_ok = std::move(reg.ok);
  out.zero_filled = std::move(cov.zero_filled);
  return out;
}

}  // namespace

FactorModelFit fit_factor_model(const Panel& panel, const RankMethod& rank_method,
                                bool transpose, const FactorOptions& options) {
  FactorModelFit fit;
  fit.transposed = transpose;
  if (!transpose) {
    OneSidedFit side = fit_one_side(panel, rank_method, options);
    fit.factors = std::move(side.eigen_side);
    fit.loadings = std::move(side.regression_side);
    fit.loading_ok = std::move(side.regression_ok);
    fit.factor_ok.assign(static_cast<std::size_t>(panel.n_times()), true);
    fit.eigenvalues = std::move(side.eigenvalues);
    fit.rank = side.rank;
    fit.zero_filled = std::move(side.zero_filled);
    return fit;
  }

  const Panel flipped = panel.transposed();
  OneSidedFit side = fit_one_side(flipped, rank_method, options);
  const Eigen::Index t_len = panel.n_times();
  Eigen::MatrixXd f = std::move(side.regression_side);  // T x r
  Eigen::MatrixXd lambda = std::move(side.eigen_side);  // N x r

  // Rotate so that (1/T) F'F = I while keeping Lambda F' unchanged.
  const Eigen::MatrixXd g = f.transpose() * f / static_cast<double>(t_len);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  if (!(es.eigenvalues().minCoeff() > 0.0) ||
      es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff() > kMaxGramCondition) {
    throw Error(ErrorCode::kSingularGram, "transposed factor Gram matrix is singular");
  }
  const Eigen::MatrixXd inv_sqrt = es.operatorInverseSqrt();
  const Eigen::MatrixXd sqrt_g = es.operatorSqrt();
  f = f * inv_sqrt;
  lambda = lambda * sqrt_g;
  for (Eigen::Index j = 0; j < f.cols(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index t = 1; t < f.rows(); ++t) {
      if (std::abs(f(t, j)) > std::abs(f(best, j))) best = t;
    }
    if (f(best, j) < 0.0) {
      f.col(j) = -f.col(j);
      lambda.col(j) = -lambda.col(j);
    }
  }

  fit.factors = std::move(f);
  fit.loadings = std::move(lambda);
  fit.factor_ok = std::move(side.regression_ok);
  fit.loading_ok.assign(static_cast<std::size_t>(panel.n_units()), false);
  for (Eigen::Index i = 0; i < panel.n_units(); ++i) {
    fit.loading_ok[static_cast<std::size_t>(i)] =
        panel.mask().row(i).cast<Eigen::Index>().sum() > 0;
  }
  fit.eigenvalues = std::move(side.eigenvalues);
  fit.rank = side.rank;
  fit.zero_filled = std::move(side.zero_filled);
  return fit;
}

}  // namespace focus
