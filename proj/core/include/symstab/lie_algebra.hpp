#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "symstab/linalg.hpp"

namespace symstab {

/// A subspace of R^ambient, stored as columns orthonormal with respect to
/// the metric it was built with (Euclidean unless stated otherwise).
struct Subspace {
  int ambient = 0;
  Eigen::MatrixXd basis;  // ambient x rank

  int rank() const { return static_cast<int>(basis.cols()); }
  bool trivial() const { return basis.cols() == 0; }

  static Subspace zero(int ambient) {
    return {ambient, Eigen::MatrixXd(ambient, 0)};
  }
  static Subspace full(int ambient) {
    return {ambient, Eigen::MatrixXd::Identity(ambient, ambient)};
  }
};

/// Sparse structure-constant entry: [e_i, e_j] picks up `value` along e_k.
/// Stored with i < j; the antisymmetric completion is implied.
struct StructureTriple {
  int i = 0, j = 0, k = 0;  // 0-based
  double value = 0.0;
};

/// Finite-dimensional real Lie algebra with a chosen basis, bracket given
/// by structure constants, and an inner product on the algebra.
///
/// The inner product doubles as the metric on the dual: |mu|^2 = mu' Q^{-1} mu.
class LieAlgebraSpec {
 public:
  /// Builds from sparse triples (antisymmetry filled in) and validates:
  /// exact antisymmetry by construction, Jacobi residual < 1e-10, and Q
  /// positive definite. Throws std::invalid_argument with a description
  /// otherwise.
  LieAlgebraSpec(int dim, const std::vector<StructureTriple>& triples, Eigen::MatrixXd metric,
                 double rank_tol = kDefaultRankTol);

  /// Zero-dimensional algebra (trivial symmetry).
  LieAlgebraSpec() : LieAlgebraSpec(0, {}, Eigen::MatrixXd(0, 0)) {}

  /// Abelian algebra with the identity metric.
  static LieAlgebraSpec abelian(int dim);

  int dim() const { return dim_; }
  const Eigen::MatrixXd& metric() const { return metric_; }
  const Eigen::MatrixXd& metric_inverse() const { return metric_inv_; }
  double rank_tol() const { return rank_tol_; }

  /// c_{ij}^k as a dense vector over k.
  const Eigen::VectorXd& structure(int i, int j) const;
  const std::vector<StructureTriple>& triples() const { return triples_; }

  /// [x, y] in basis coefficients.
  Eigen::VectorXd bracket(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

  /// Max componentwise Jacobi identity residual over basis triples.
  double jacobi_residual() const;

  /// Inner products on g and g*.
  double inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  double dual_norm_sq(const Eigen::VectorXd& mu) const;

 private:
  int dim_;
  std::vector<StructureTriple> triples_;
  std::vector<Eigen::VectorXd> table_;  // dim*dim dense c[i][j]
  Eigen::MatrixXd metric_;
  Eigen::MatrixXd metric_inv_;
  double rank_tol_;
};

/// Isotropy subalgebra of the covector mu under the coadjoint action:
/// the kernel over xi of (ad*_xi mu)_j = sum_{i,k} xi_i c_{ij}^k mu_k.
/// The returned basis is orthonormal in the algebra metric.
Subspace coadjoint_isotropy(const LieAlgebraSpec& alg, const Eigen::VectorXd& mu);

/// Metric-orthogonal complement within the algebra.
Subspace orthogonal_complement(const LieAlgebraSpec& alg, const Subspace& s);

/// Worst offending triple of an invariance check.
struct InvarianceReport {
  double residual = 0.0;
  int eta = -1, xi1 = -1, xi2 = -1;  // indices: eta into sub basis, xi into g basis
};

/// Infinitesimal Ad-invariance test of the metric along the subalgebra
/// `sub`: max |<[eta,xi1],xi2> + <xi1,[eta,xi2]>| over basis elements.
/// Systems are accepted only when this is < 1e-8 for the isotropy algebra
/// in play (sufficient for connected groups; see README limitations).
InvarianceReport check_invariance(const LieAlgebraSpec& alg, const Subspace& sub);

}  // namespace symstab
