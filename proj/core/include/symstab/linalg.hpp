#pragma once

#include <Eigen/Core>

namespace symstab {

/// Relative singular-value cutoff used for every rank decision; the
/// per-system file may override the factor.
inline constexpr double kDefaultRankTol = 1e-10;

/// Orthonormal basis (columns) of ker A. Singular values below
/// rel_tol * sigma_max count as zero; a zero matrix has a full kernel.
Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& A, double rel_tol = kDefaultRankTol);

/// Orthonormal basis (columns) of the column space of A.
Eigen::MatrixXd column_space_basis(const Eigen::MatrixXd& A, double rel_tol = kDefaultRankTol);

int matrix_rank(const Eigen::MatrixXd& A, double rel_tol = kDefaultRankTol);

/// Minimum-norm least-squares solution of A x ~= b.
Eigen::VectorXd lstsq_min_norm(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               double rel_tol = kDefaultRankTol);

/// Re-expresses the columns of B as a basis orthonormal with respect to the
/// inner product x' Q y (Q symmetric positive definite). Rank-deficient
/// inputs lose their dependent directions.
Eigen::MatrixXd metric_orthonormalize(const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                                      double rel_tol = kDefaultRankTol);

/// Matrix exponential (scaling and squaring).
Eigen::MatrixXd expm(const Eigen::MatrixXd& A);

/// Time-t flow of the affine field z' = A z + b, returned as (E, v) with
/// z(t) = E z(0) + v. Computed from the exponential of the augmented matrix.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> affine_flow(const Eigen::MatrixXd& A,
                                                        const Eigen::VectorXd& b, double t);

/// Max |(I - U U') V| over entries: 0 iff span(V) is contained in span(U)
/// for Euclidean-orthonormal U.
double containment_residual(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V);

/// Max-entry difference of the orthogonal projectors of two
/// Euclidean-orthonormal bases; 0 iff they span the same subspace.
double projector_distance(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V);

}  // namespace symstab
