#include "symstab/equilibria.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace symstab {

namespace {
constexpr double kFlagTol = 1e-8;
constexpr double kOrthTol = 1e-10;
}

Subspace isotropy_algebra_of_point(const SystemDef& sys, const Eigen::VectorXd& m) {
  if (sys.algebra_dim() == 0) return Subspace::zero(0);
  Eigen::MatrixXd G = sys.generator_matrix(m);
  Eigen::MatrixXd ker = kernel_basis(G, sys.algebra.rank_tol());
  return {sys.algebra_dim(),
          metric_orthonormalize(ker, sys.algebra.metric(), sys.algebra.rank_tol())};
}

VelocitySolution solve_velocity(const SystemDef& sys, const Eigen::VectorXd& m) {
  const int d = sys.algebra_dim();
  Eigen::VectorXd xh = hamiltonian_vector_field(sys, m);
  if (d == 0) return {Eigen::VectorXd(0), xh.norm()};
  Eigen::MatrixXd G = sys.generator_matrix(m);
  // Minimum Q-norm among least-squares minimizers: substitute eta = L' xi
  // with Q = L L', so |eta| = |xi|_Q and the SVD pseudoinverse picks the
  // minimum-norm eta.
  Eigen::LLT<Eigen::MatrixXd> llt(sys.algebra.metric());
  Eigen::MatrixXd Lt = llt.matrixU();
  Eigen::MatrixXd Gw = Lt.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(G);
  Eigen::VectorXd eta = lstsq_min_norm(Gw, xh, sys.algebra.rank_tol());
  Eigen::VectorXd xi = Lt.triangularView<Eigen::Upper>().solve(eta);
  return {xi, (G * xi - xh).norm()};
}

RelEquilibrium describe_equilibrium(const SystemDef& sys, const Eigen::VectorXd& m,
                                    const Eigen::VectorXd& xi) {
  RelEquilibrium re;
  re.point = m;
  re.velocity = xi;
  const int d = sys.algebra_dim();
  Eigen::VectorXd xh = hamiltonian_vector_field(sys, m);
  re.residual = d == 0 ? xh.norm() : (sys.generator_matrix(m) * xi - xh).norm();
  re.mu = moment_map(sys, m);
  re.isotropy = isotropy_algebra_of_point(sys, m);

  // ad*_xi mu defect: xi of a relative equilibrium fixes its own momentum.
  Eigen::VectorXd ad = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i)
      if (xi[i] != 0.0) ad[j] += xi[i] * sys.algebra.structure(i, j).dot(re.mu);
  re.coadjoint_defect = d == 0 ? 0.0 : ad.cwiseAbs().maxCoeff();
  re.velocity_in_mu_isotropy = re.coadjoint_defect < kFlagTol * std::max(1.0, re.mu.norm());

  re.orthogonality_defect = 0.0;
  for (int a = 0; a < re.isotropy.rank(); ++a)
    re.orthogonality_defect = std::max(
        re.orthogonality_defect, std::abs(sys.algebra.inner(xi, re.isotropy.basis.col(a))));
  re.velocity_orthogonal_to_isotropy = re.orthogonality_defect < kOrthTol;
  return re;
}

RelEquilibrium refine_relative_equilibrium(const SystemDef& sys, const Eigen::VectorXd& m0,
                                           const Eigen::VectorXd& xi0,
                                           const RefineOptions& options) {
  const int dim = sys.dim();
  const int d = sys.algebra_dim();
  if (m0.size() != dim) throw std::invalid_argument("refine: point has wrong dimension");
  if (xi0.size() != d) throw std::invalid_argument("refine: velocity has wrong dimension");

  // Freeze xi along g_{m0}: parameterize xi = N eta over the metric
  // complement N of the isotropy at the starting point.
  Subspace gm0 = isotropy_algebra_of_point(sys, m0);
  Eigen::MatrixXd N = orthogonal_complement(sys.algebra, gm0).basis;
  const int free = static_cast<int>(N.cols());

  Eigen::VectorXd m = m0;
  Eigen::VectorXd eta =
      free > 0 ? Eigen::VectorXd(N.transpose() * sys.algebra.metric() * xi0) : Eigen::VectorXd(0);

  auto gradient_at = [&](const Eigen::VectorXd& mm, const Eigen::VectorXd& ee) {
    return sys.augmented_gradient(mm, free > 0 ? Eigen::VectorXd(N * ee) : Eigen::VectorXd::Zero(d));
  };

  Eigen::VectorXd F = gradient_at(m, eta);
  double best = F.norm();
  const double initial = best;
  int stall = 0;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (F.norm() < options.tolerance) break;
    Eigen::VectorXd xi = free > 0 ? Eigen::VectorXd(N * eta) : Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd J(dim, dim + free);
    J.leftCols(dim) = sys.augmented_hessian(m, xi);
    if (free > 0) J.rightCols(free) = -(sys.moment_jacobian(m).transpose() * N);
    Eigen::VectorXd step = lstsq_min_norm(J, -F, sys.algebra.rank_tol());
    m += step.head(dim);
    if (free > 0) eta += step.tail(free);
    F = gradient_at(m, eta);

    double r = F.norm();
    if (!std::isfinite(r) || r > 1e3 * (initial + 1.0))
      throw RefinementError("Newton refinement diverged (residual " + std::to_string(r) + ")");
    stall = r > 0.9 * best ? stall + 1 : 0;
    best = std::min(best, r);
    if (stall >= 6) {
      // Report the near-degenerate direction that blocks progress.
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinV);
      Eigen::VectorXd null_dir = svd.matrixV().col(svd.matrixV().cols() - 1);
      std::ostringstream msg;
      msg << "Newton refinement stalled at residual " << r << "; near-null direction [";
      for (Eigen::Index i = 0; i < null_dir.size(); ++i)
        msg << (i ? ", " : "") << null_dir[i];
      msg << "]";
      throw RefinementError(msg.str());
    }
  }
  if (!(F.norm() < std::max(options.tolerance, 1e-12)))
    throw RefinementError("Newton refinement did not converge: residual " +
                          std::to_string(F.norm()) + " after " +
                          std::to_string(options.max_iterations) + " iterations");

  // Canonical velocity at the converged point: the minimum-norm solution,
  // orthogonal to the (possibly different) isotropy algebra there.
  VelocitySolution vel = solve_velocity(sys, m);
  return describe_equilibrium(sys, m, vel.xi);
}

}  // namespace symstab
