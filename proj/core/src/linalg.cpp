#include "focus/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Eigenvalues>

#include "focus/errors.hpp"

namespace focus {

namespace {

EigenPairs full_decomposition(const Eigen::MatrixXd& a, Eigen::Index k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularSystem, "symmetric eigendecomposition failed");
  }
  EigenPairs out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rightCols(k).rowwise().reverse();
  return out;
}

// Block power iteration on (a + shift I) with Rayleigh-Ritz extraction. Returns
// the block's Ritz pairs once the leading k have converged, or nothing.
std::optional<EigenPairs> shifted_subspace_iteration(const Eigen::MatrixXd& a, Eigen::Index k,
                                                     Eigen::Index block, double shift,
                                                     double tolerance, int max_iterations) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd q(n, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      // Deterministic, well-spread start vectors.
      q(i, j) = std::cos(0.7 * static_cast<double>((i + 1) * (j + 1)) + 0.3 * static_cast<double>(j));
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(q);
  q = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);

  for (int iter = 0; iter < max_iterations; ++iter) {
    Eigen::MatrixXd z = a * q;
    if (shift != 0.0) z += shift * q;
    qr.compute(z);
    q = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);

    const Eigen::MatrixXd aq = a * q;
    const Eigen::MatrixXd small = q.transpose() * aq;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(0.5 * (small + small.transpose()));
    const Eigen::VectorXd values = ritz.eigenvalues().reverse();
    const Eigen::MatrixXd basis = ritz.eigenvectors().rowwise().reverse();
    q = q * basis;
    const Eigen::MatrixXd residual =
        aq * basis.leftCols(k) - q.leftCols(k) * values.head(k).asDiagonal();
    if (residual.colwise().norm().maxCoeff() <= tolerance) {
      return EigenPairs{values, q};
    }
  }
  return std::nullopt;
}

EigenPairs subspace_iteration(const Eigen::MatrixXd& a, Eigen::Index k) {
  const Eigen::Index n = a.rows();
  const Eigen::Index block = std::min<Eigen::Index>(n, k + std::max<Eigen::Index>(2 * k, 16));
  const double bound = a.cwiseAbs().rowwise().sum().maxCoeff();
  const double tolerance = 1e-12 * std::max(bound, std::numeric_limits<double>::min());

  // Unshifted iteration finds the block of largest |lambda|. That block holds
  // the k largest algebraic eigenvalues when the k-th of them is at least the
  // smallest magnitude in the block, which covers the nearly positive
  // semidefinite matrices met in practice.
  if (auto plain = shifted_subspace_iteration(a, k, block, 0.0, tolerance, 5000)) {
    const double floor = plain->values.cwiseAbs().minCoeff();
    if (block == n || plain->values(k - 1) >= floor) {
      return EigenPairs{plain->values.head(k), plain->vectors.leftCols(k)};
    }
  }
  // Fallback: a Gershgorin shift makes every eigenvalue positive. Correct for
  // any symmetric matrix but slow when the spectrum is narrow relative to it.
  if (auto shifted = shifted_subspace_iteration(a, k, block, bound, tolerance, 20000)) {
    return EigenPairs{shifted->values.head(k), shifted->vectors.leftCols(k)};
  }
  throw Error(ErrorCode::kSingularSystem, "subspace iteration did not converge");
}

}  // namespace

EigenPairs top_eigenpairs(const Eigen::MatrixXd& symmetric, Eigen::Index k,
                          EigenMethod method) {
  const Eigen::Index n = symmetric.rows();
  if (symmetric.cols() != n) {
    throw Error(ErrorCode::kInvalidArgument, "eigendecomposition needs a square matrix");
  }
  if (k < 1 || k > n) {
    throw Error(ErrorCode::kRankTooLarge, "requested eigenpair count outside [1, n]");
  }
  if (method == EigenMethod::kAuto) {
    method = n <= kFullEigenLimit ? EigenMethod::kFull : EigenMethod::kIterative;
  }
  return method == EigenMethod::kFull ? full_decomposition(symmetric, k)
                                      : subspace_iteration(symmetric, k);
}

double condition_number_symmetric(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  const double lo = solver.eigenvalues().minCoeff();
  const double hi = solver.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& a, int n) {
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd base = a;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

void normalize_column_signs(Eigen::MatrixXd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < m.rows(); ++i) {
      if (std::abs(m(i, j)) > std::abs(m(best, j))) best = i;
    }
    if (m(best, j) < 0.0) m.col(j) = -m.col(j);
  }
}

}  // namespace focus
