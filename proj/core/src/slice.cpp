#include "symstab/slice.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace symstab {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::StableCertified: return "STABLE_CERTIFIED";
    case Verdict::InconclusiveIndefinite: return "INCONCLUSIVE_INDEFINITE";
    case Verdict::InconclusiveDegenerate: return "INCONCLUSIVE_DEGENERATE";
  }
  return "?";
}

const char* to_string(Definiteness d) {
  switch (d) {
    case Definiteness::PositiveDefinite: return "positive_definite";
    case Definiteness::NegativeDefinite: return "negative_definite";
    case Definiteness::PositiveSemidefinite: return "positive_semidefinite";
    case Definiteness::NegativeSemidefinite: return "negative_semidefinite";
    case Definiteness::Indefinite: return "indefinite";
    case Definiteness::Zero: return "zero";
  }
  return "?";
}

Subspace kernel_dphi(const SystemDef& sys, const Eigen::VectorXd& m) {
  if (sys.algebra_dim() == 0) return Subspace::full(sys.dim());
  Eigen::MatrixXd J = sys.moment_jacobian(m);
  return {sys.dim(), kernel_basis(J, sys.algebra.rank_tol())};
}

std::pair<Subspace, Subspace> tangent_spaces(const SystemDef& sys, const Eigen::VectorXd& m,
                                             const Eigen::VectorXd& mu) {
  if (sys.algebra_dim() == 0)
    return {Subspace::zero(sys.dim()), Subspace::zero(sys.dim())};
  Eigen::MatrixXd G = sys.generator_matrix(m);
  Subspace t_g{sys.dim(), column_space_basis(G, sys.algebra.rank_tol())};
  Subspace h_alg = coadjoint_isotropy(sys.algebra, mu);
  Subspace t_h{sys.dim(),
               column_space_basis(G * h_alg.basis, sys.algebra.rank_tol())};
  return {std::move(t_g), std::move(t_h)};
}

SliceData symplectic_slice(const SystemDef& sys, const Eigen::VectorXd& m) {
  SliceData data;
  data.kernel = kernel_dphi(sys, m);
  Eigen::VectorXd mu = moment_map(sys, m);
  auto [t_g, t_h] = tangent_spaces(sys, m, mu);
  data.orbit_tangent = std::move(t_g);
  data.h_orbit_tangent = std::move(t_h);

  data.containment_residual =
      containment_residual(data.kernel.basis, data.h_orbit_tangent.basis);
  if (data.containment_residual > 1e-10) {
    std::ostringstream msg;
    msg << "H-orbit tangent space is not contained in ker dPhi (residual "
        << data.containment_residual << "); rank detection is inconsistent";
    throw SliceError(msg.str());
  }

  // Slice = Euclidean-orthogonal complement of T_H inside K, expressed in
  // kernel coordinates first.
  const Eigen::MatrixXd& K = data.kernel.basis;
  Eigen::MatrixXd C = K.transpose() * data.h_orbit_tangent.basis;  // k x t
  Eigen::MatrixXd W = kernel_basis(C.transpose(), sys.algebra.rank_tol());
  data.slice = K * W;

  const int s = static_cast<int>(data.slice.cols());
  const int expected = data.kernel.rank() - data.h_orbit_tangent.rank();
  if (s != expected) {
    std::ostringstream msg;
    msg << "slice dimension " << s << " does not match ker dPhi minus orbit ("
        << expected << ")";
    throw SliceError(msg.str());
  }

  Eigen::MatrixXd omega = sys.space.omega();
  data.omega_slice = data.slice.transpose() * omega * data.slice;
  data.omega_slice_det = s == 0 ? 1.0 : data.omega_slice.determinant();
  if (std::abs(data.omega_slice_det) <= 1e-10) {
    std::ostringstream msg;
    msg << "restricted symplectic form is degenerate (|det| = "
        << std::abs(data.omega_slice_det) << "); rank misdetection upstream";
    throw SliceError(msg.str());
  }
  if (s % 2 != 0) throw SliceError("slice dimension is odd; rank misdetection upstream");
  return data;
}

void attach_restricted_hessian(const SystemDef& sys, const Eigen::VectorXd& m,
                               const Eigen::VectorXd& xi, SliceData& data,
                               double precondition_tol, double descent_tol) {
  double critical_residual = sys.augmented_gradient(m, xi).norm();
  if (critical_residual > precondition_tol) {
    std::ostringstream msg;
    msg << "d(h - <Phi, xi>) does not vanish at m (|grad| = " << critical_residual
        << " > " << precondition_tol << "); the Hessian is not well-defined there";
    throw SliceError(msg.str());
  }
  Eigen::MatrixXd H = sys.augmented_hessian(m, xi);
  data.hessian_kernel = data.kernel.basis.transpose() * H * data.kernel.basis;
  data.hessian_slice = data.slice.transpose() * H * data.slice;
  // The restriction to K must kill every H-orbit direction, otherwise it
  // does not descend to the quotient and xi is inconsistent.
  data.descent_residual =
      data.h_orbit_tangent.rank() == 0
          ? 0.0
          : (data.h_orbit_tangent.basis.transpose() * H * data.kernel.basis)
                .cwiseAbs()
                .maxCoeff();
  if (data.descent_residual > descent_tol) {
    std::ostringstream msg;
    msg << "Hessian does not vanish on the H-orbit directions (residual "
        << data.descent_residual << "); velocity xi is inconsistent";
    throw SliceError(msg.str());
  }
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> restricted_hessian(const SystemDef& sys,
                                                               const Eigen::VectorXd& m,
                                                               const Eigen::VectorXd& xi) {
  SliceData data = symplectic_slice(sys, m);
  attach_restricted_hessian(sys, m, xi, data);
  return {data.hessian_kernel, data.hessian_slice};
}

namespace {

struct Classification {
  int positive = 0, negative = 0, zero = 0;
  Definiteness definiteness = Definiteness::Zero;
};

Classification classify(const Eigen::VectorXd& eigenvalues, double cutoff) {
  Classification c;
  if (eigenvalues.size() == 0) {
    c.definiteness = Definiteness::Zero;
    return c;
  }
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues[i] > cutoff)
      ++c.positive;
    else if (eigenvalues[i] < -cutoff)
      ++c.negative;
    else
      ++c.zero;
  }
  if (c.positive == 0 && c.negative == 0)
    c.definiteness = Definiteness::Zero;
  else if (c.positive > 0 && c.negative > 0)
    c.definiteness = Definiteness::Indefinite;
  else if (c.zero == 0)
    c.definiteness = c.positive > 0 ? Definiteness::PositiveDefinite
                                    : Definiteness::NegativeDefinite;
  else
    c.definiteness = c.positive > 0 ? Definiteness::PositiveSemidefinite
                                    : Definiteness::NegativeSemidefinite;
  return c;
}

Eigen::MatrixXd eigen_kernel(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& es,
                             double cutoff) {
  const auto& ev = es.eigenvalues();
  if (ev.size() == 0) return Eigen::MatrixXd(0, 0);
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) <= cutoff) idx.push_back(static_cast<int>(i));
  Eigen::MatrixXd Z(es.eigenvectors().rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c)
    Z.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(idx[c]);
  return Z;
}

}  // namespace

StabilityReport stability_verdict(const SystemDef& sys, const RelEquilibrium& re,
                                  const StabilityThresholds& thresholds) {
  StabilityReport report;
  report.thresholds = thresholds;

  // Theorem hypothesis: the algebra metric must be Ad-invariant along the
  // isotropy algebra of mu.
  Subspace h_alg = coadjoint_isotropy(sys.algebra, re.mu);
  InvarianceReport inv = check_invariance(sys.algebra, h_alg);
  report.metric_invariance_residual = inv.residual;
  if (inv.residual >= thresholds.metric_invariance) {
    std::ostringstream msg;
    msg << "algebra metric is not Ad-invariant along the isotropy algebra of mu "
        << "(residual " << inv.residual << ", triple eta=" << inv.eta + 1
        << " xi1=" << inv.xi1 + 1 << " xi2=" << inv.xi2 + 1 << ")";
    throw SliceError(msg.str());
  }

  report.slice = symplectic_slice(sys, re.point);
  attach_restricted_hessian(sys, re.point, re.velocity, report.slice,
                            thresholds.precondition, thresholds.descent);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_slice(report.slice.hessian_slice);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_kernel(report.slice.hessian_kernel);
  report.slice_eigenvalues = es_slice.eigenvalues();
  report.kernel_eigenvalues = es_kernel.eigenvalues();

  double rho = 0.0;
  if (report.kernel_eigenvalues.size() > 0)
    rho = report.kernel_eigenvalues.cwiseAbs().maxCoeff();
  if (report.slice_eigenvalues.size() > 0)
    rho = std::max(rho, report.slice_eigenvalues.cwiseAbs().maxCoeff());
  const double cutoff = std::max(thresholds.rel_definiteness * rho, thresholds.absolute_zero);

  Classification slice_cls = classify(report.slice_eigenvalues, cutoff);
  report.definiteness = slice_cls.definiteness;
  report.signature_positive = slice_cls.positive;
  report.signature_negative = slice_cls.negative;

  const int slice_dim = report.slice.slice_dim();
  if (slice_dim == 0 ||
      slice_cls.definiteness == Definiteness::PositiveDefinite ||
      slice_cls.definiteness == Definiteness::NegativeDefinite) {
    report.verdict = Verdict::StableCertified;
  } else if (slice_cls.definiteness == Definiteness::Indefinite) {
    report.verdict = Verdict::InconclusiveIndefinite;
  } else {
    report.verdict = Verdict::InconclusiveDegenerate;
  }

  // Cross-check: Q_K semidefinite with kernel exactly T_H.
  Classification kernel_cls = classify(report.kernel_eigenvalues, cutoff);
  Eigen::MatrixXd Z = eigen_kernel(es_kernel, cutoff);
  Eigen::MatrixXd orbit_in_kernel = column_space_basis(
      report.slice.kernel.basis.transpose() * report.slice.h_orbit_tangent.basis,
      sys.algebra.rank_tol());
  report.kernel_matches_orbit =
      Z.cols() == orbit_in_kernel.cols() &&
      projector_distance(Z, orbit_in_kernel) <= thresholds.kernel_match;
  if (kernel_cls.definiteness == Definiteness::Indefinite) {
    report.kernel_formulation_verdict = Verdict::InconclusiveIndefinite;
  } else if (report.kernel_matches_orbit) {
    report.kernel_formulation_verdict = Verdict::StableCertified;
  } else {
    report.kernel_formulation_verdict = Verdict::InconclusiveDegenerate;
  }

  if (report.kernel_formulation_verdict != report.verdict) {
    std::ostringstream msg;
    msg << "internal consistency error: slice verdict " << to_string(report.verdict)
        << " disagrees with kernel formulation "
        << to_string(report.kernel_formulation_verdict);
    throw SliceError(msg.str());
  }

  report.regular_point =
      sys.algebra_dim() == 0 ||
      matrix_rank(sys.moment_jacobian(re.point), sys.algebra.rank_tol()) == sys.algebra_dim();
  report.regular_case_applies =
      report.regular_point && report.verdict == Verdict::StableCertified;
  return report;
}

}  // namespace symstab
