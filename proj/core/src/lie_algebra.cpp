#include "symstab/lie_algebra.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace symstab {

namespace {
constexpr double kJacobiTol = 1e-10;
}

LieAlgebraSpec::LieAlgebraSpec(int dim, const std::vector<StructureTriple>& triples,
                               Eigen::MatrixXd metric, double rank_tol)
    : dim_(dim), triples_(triples), metric_(std::move(metric)), rank_tol_(rank_tol) {
  if (dim_ < 0) throw std::invalid_argument("algebra dimension must be >= 0");
  if (metric_.rows() != dim_ || metric_.cols() != dim_)
    throw std::invalid_argument("inner-product matrix must be dim x dim");

  table_.assign(static_cast<std::size_t>(dim_) * static_cast<std::size_t>(std::max(dim_, 1)),
                Eigen::VectorXd::Zero(dim_));
  for (const auto& t : triples_) {
    if (t.i < 0 || t.j < 0 || t.k < 0 || t.i >= dim_ || t.j >= dim_ || t.k >= dim_)
      throw std::invalid_argument("structure-constant index out of range");
    if (t.i >= t.j)
      throw std::invalid_argument("structure constants must be given with i < j");
    table_[static_cast<std::size_t>(t.i * dim_ + t.j)][t.k] += t.value;
    table_[static_cast<std::size_t>(t.j * dim_ + t.i)][t.k] -= t.value;
  }

  if (dim_ > 0) {
    if ((metric_ - metric_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("inner-product matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(metric_);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("inner-product matrix must be positive definite");
    metric_inv_ = metric_.inverse();
  } else {
    metric_inv_ = Eigen::MatrixXd(0, 0);
  }

  double jr = jacobi_residual();
  if (jr >= kJacobiTol)
    throw std::invalid_argument("Jacobi identity violated: residual " + std::to_string(jr));
}

LieAlgebraSpec LieAlgebraSpec::abelian(int dim) {
  return LieAlgebraSpec(dim, {}, Eigen::MatrixXd::Identity(dim, dim));
}

const Eigen::VectorXd& LieAlgebraSpec::structure(int i, int j) const {
  return table_.at(static_cast<std::size_t>(i * dim_ + j));
}

Eigen::VectorXd LieAlgebraSpec::bracket(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& y) const {
  if (x.size() != dim_ || y.size() != dim_)
    throw std::invalid_argument("bracket: coefficient vectors must have the algebra dimension");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
  for (int i = 0; i < dim_; ++i) {
    if (x[i] == 0.0) continue;
    for (int j = 0; j < dim_; ++j) {
      if (y[j] == 0.0) continue;
      out += x[i] * y[j] * structure(i, j);
    }
  }
  return out;
}

double LieAlgebraSpec::jacobi_residual() const {
  double worst = 0.0;
  Eigen::VectorXd ei = Eigen::VectorXd::Zero(dim_);
  Eigen::VectorXd ej = Eigen::VectorXd::Zero(dim_);
  Eigen::VectorXd ek = Eigen::VectorXd::Zero(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j)
      for (int k = j + 1; k < dim_; ++k) {
        ei.setZero(); ei[i] = 1.0;
        ej.setZero(); ej[j] = 1.0;
        ek.setZero(); ek[k] = 1.0;
        Eigen::VectorXd r = bracket(bracket(ei, ej), ek) + bracket(bracket(ej, ek), ei) +
                            bracket(bracket(ek, ei), ej);
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
      }
  return worst;
}

double LieAlgebraSpec::inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  return x.dot(metric_ * y);
}

double LieAlgebraSpec::dual_norm_sq(const Eigen::VectorXd& mu) const {
  if (dim_ == 0) return 0.0;
  return mu.dot(metric_inv_ * mu);
}

Subspace coadjoint_isotropy(const LieAlgebraSpec& alg, const Eigen::VectorXd& mu) {
  const int d = alg.dim();
  if (mu.size() != d) throw std::invalid_argument("coadjoint_isotropy: covector size mismatch");
  // L[j][i] = sum_k c_{ij}^k mu_k; ad*_xi mu = L xi.
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) L(j, i) = alg.structure(i, j).dot(mu);
  Eigen::MatrixXd ker = kernel_basis(L, alg.rank_tol());
  return {d, metric_orthonormalize(ker, alg.metric(), alg.rank_tol())};
}

Subspace orthogonal_complement(const LieAlgebraSpec& alg, const Subspace& s) {
  const int d = alg.dim();
  if (s.ambient != d) throw std::invalid_argument("orthogonal_complement: ambient mismatch");
  if (s.rank() == 0) return {d, metric_orthonormalize(Eigen::MatrixXd::Identity(d, d), alg.metric(), alg.rank_tol())};
  // x is in the complement iff B' Q x = 0.
  Eigen::MatrixXd ker = kernel_basis(s.basis.transpose() * alg.metric(), alg.rank_tol());
  return {d, metric_orthonormalize(ker, alg.metric(), alg.rank_tol())};
}

InvarianceReport check_invariance(const LieAlgebraSpec& alg, const Subspace& sub) {
  InvarianceReport report;
  const int d = alg.dim();
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd e2 = Eigen::VectorXd::Zero(d);
  for (int a = 0; a < sub.rank(); ++a) {
    Eigen::VectorXd eta = sub.basis.col(a);
    for (int i = 0; i < d; ++i) {
      e1.setZero(); e1[i] = 1.0;
      Eigen::VectorXd ad1 = alg.bracket(eta, e1);
      for (int j = 0; j < d; ++j) {
        e2.setZero(); e2[j] = 1.0;
        double v = alg.inner(ad1, e2) + alg.inner(e1, alg.bracket(eta, e2));
        if (std::abs(v) > report.residual) {
          report.residual = std::abs(v);
          report.eta = a;
          report.xi1 = i;
          report.xi2 = j;
        }
      }
    }
  }
  return report;
}

}  // namespace symstab
