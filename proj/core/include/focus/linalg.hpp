#ifndef FOCUS_LINALG_HPP_
#define FOCUS_LINALG_HPP_

#include <Eigen/Dense>

namespace focus {

enum class EigenMethod {
  kAuto,       // full decomposition up to kFullEigenLimit, iterative above
  kFull,       // dense symmetric QR
  kIterative,  // shifted block subspace iteration with Rayleigh-Ritz
};

inline constexpr Eigen::Index kFullEigenLimit = 2048;

struct EigenPairs {
  Eigen::VectorXd values;   // nonincreasing
  Eigen::MatrixXd vectors;  // orthonormal columns, matching values
};

// Largest-algebraic k eigenpairs of a symmetric matrix. kFull also returns the
// whole spectrum in `values` (vectors still truncated to k columns).
EigenPairs top_eigenpairs(const Eigen::MatrixXd& symmetric, Eigen::Index k,
                          EigenMethod method = EigenMethod::kAuto);

// Ratio of extreme eigenvalues of a symmetric matrix; +inf when the smallest
// eigenvalue is not positive.
double condition_number_symmetric(const Eigen::MatrixXd& symmetric);

double spectral_norm(const Eigen::MatrixXd& m);
double spectral_radius(const Eigen::MatrixXd& m);

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& a, int n);

// Flip each column so its largest-magnitude entry is positive; ties go to the
// earliest index.
void normalize_column_signs(Eigen::MatrixXd& m);

}  // namespace focus

#endif  // FOCUS_LINALG_HPP_
