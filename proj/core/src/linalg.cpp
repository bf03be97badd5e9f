#include "symstab/linalg.hpp"

#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace symstab {

namespace {

Eigen::JacobiSVD<Eigen::MatrixXd> full_svd(const Eigen::MatrixXd& A) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

int rank_from_singular_values(const Eigen::VectorXd& sv, double rel_tol) {
  if (sv.size() == 0) return 0;
  double cutoff = rel_tol * sv[0];
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++r;
  return r;
}

}  // namespace

Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& A, double rel_tol) {
  const Eigen::Index n = A.cols();
  if (n == 0) return Eigen::MatrixXd(0, 0);
  if (A.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  auto svd = full_svd(A);
  int r = rank_from_singular_values(svd.singularValues(), rel_tol);
  return svd.matrixV().rightCols(n - r);
}

Eigen::MatrixXd column_space_basis(const Eigen::MatrixXd& A, double rel_tol) {
  if (A.cols() == 0 || A.rows() == 0) return Eigen::MatrixXd(A.rows(), 0);
  auto svd = full_svd(A);
  int r = rank_from_singular_values(svd.singularValues(), rel_tol);
  return svd.matrixU().leftCols(r);
}

int matrix_rank(const Eigen::MatrixXd& A, double rel_tol) {
  if (A.cols() == 0 || A.rows() == 0) return 0;
  auto svd = Eigen::JacobiSVD<Eigen::MatrixXd>(A);
  return rank_from_singular_values(svd.singularValues(), rel_tol);
}

Eigen::VectorXd lstsq_min_norm(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               double rel_tol) {
  if (A.cols() == 0) return Eigen::VectorXd(0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double cutoff = sv.size() ? rel_tol * sv[0] : 0.0;
  Eigen::VectorXd c = svd.matrixU().transpose() * b;
  for (Eigen::Index i = 0; i < sv.size(); ++i) c[i] = sv[i] > cutoff ? c[i] / sv[i] : 0.0;
  return svd.matrixV() * c;
}

Eigen::MatrixXd metric_orthonormalize(const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                                      double rel_tol) {
  if (B.cols() == 0) return B;
  if (Q.rows() != B.rows() || Q.cols() != B.rows())
    throw std::invalid_argument("metric_orthonormalize: metric/basis size mismatch");
  // Factor Q = L L' and orthonormalize L'B in the Euclidean sense.
  Eigen::LLT<Eigen::MatrixXd> llt(Q);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("metric_orthonormalize: metric not positive definite");
  Eigen::MatrixXd Lt = llt.matrixU();
  Eigen::MatrixXd E = column_space_basis(Lt * B, rel_tol);
  return Lt.triangularView<Eigen::Upper>().solve(E);
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& A) { return A.exp(); }

std::pair<Eigen::MatrixXd, Eigen::VectorXd> affine_flow(const Eigen::MatrixXd& A,
                                                        const Eigen::VectorXd& b, double t) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = t * A;
  aug.topRightCorner(n, 1) = t * b;
  Eigen::MatrixXd E = aug.exp();
  return {E.topLeftCorner(n, n), E.topRightCorner(n, 1)};
}

double containment_residual(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V) {
  if (V.cols() == 0) return 0.0;
  Eigen::MatrixXd R = V - U * (U.transpose() * V);
  return R.cwiseAbs().maxCoeff();
}

double projector_distance(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V) {
  Eigen::MatrixXd PU = U * U.transpose();
  Eigen::MatrixXd PV = V * V.transpose();
  if (PU.rows() == 0) return 0.0;
  return (PU - PV).cwiseAbs().maxCoeff();
}

}  // namespace symstab
