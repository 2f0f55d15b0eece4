#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace vessel {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Numerical thresholds shared by every operation in the library.
/// All comparisons of the form "residual <= residual_tol * scale" use the
/// profile passed in by the caller, so results are reproducible.
struct ToleranceProfile {
  double residual_tol = 1e-9;     ///< relative residual bound for linear identities
  double rank_tol = 1e-10;        ///< relative singular-value cutoff
  double eig_cluster_tol = 1e-7;  ///< eigenvalue clustering radius

  bool valid() const {
    auto ok = [](double t) { return t >= 0.0 && t < 1.0; };
    return ok(residual_tol) && ok(rank_tol) && ok(eig_cluster_tol);
  }
};

/// One eigenvalue cluster of a square matrix.
struct EigenPair {
  Complex value;        ///< cluster representative (mean of clustered eigenvalues)
  CVec right;           ///< M v = value * v
  CVec left;            ///< w^H M = value * w^H
  int multiplicity = 1; ///< cluster size = algebraic multiplicity
};

bool all_finite(const CMat& m);

/// Count of singular values above rank_tol * largest singular value.
int rank_with_tol(const CMat& m, const ToleranceProfile& tol);

/// Orthonormal basis of the numerical kernel; may have zero columns.
/// rank_with_tol(m) + returned column count == m.cols() for the same profile.
CMat nullspace_basis(const CMat& m, const ToleranceProfile& tol);

/// Kernel with the singular-value cutoff referenced to an external scale
/// (for matrices that are residuals of structural identities, where a
/// near-zero matrix must count as rank deficient).
CMat nullspace_basis_scaled(const CMat& m, double reference_scale, const ToleranceProfile& tol);

/// Eigenvalues clustered within eig_cluster_tol, with representative
/// right/left eigenvectors picked by smallest residual inside the cluster.
std::vector<EigenPair> eig_decompose(const CMat& m, const ToleranceProfile& tol);

/// Kronecker product (column-major vec convention: vec(AXB) = (B^T (x) A) vec(X)).
CMat kron(const CMat& a, const CMat& b);

}  // namespace vessel
