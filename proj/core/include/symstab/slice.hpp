#pragma once

#include <utility>

#include <Eigen/Core>

#include "symstab/equilibria.hpp"
#include "symstab/phase_space.hpp"

namespace symstab {

/// Bases and restricted forms around a relative equilibrium: the kernel of
/// d Phi_m, the tangent spaces of the G- and H-orbits, and a concrete slice
/// realizing ker(d Phi_m) / T_m(H.m) as the Euclidean-orthogonal complement
/// of the orbit direction inside the kernel.
struct SliceData {
  Subspace kernel;           // K = ker d Phi_m
  Subspace orbit_tangent;    // T_m(G.m)
  Subspace h_orbit_tangent;  // T_m(H.m), H the isotropy group of mu
  Eigen::MatrixXd slice;     // S: 2n x s, Euclidean-orthonormal, S ⊥ T_H, S ⊂ K

  Eigen::MatrixXd omega_slice;  // omega(s_i, s_j); must be nondegenerate
  double omega_slice_det = 0.0;
  double containment_residual = 0.0;  // max |(I - K K') T_H|

  // Filled by attach_restricted_hessian:
  Eigen::MatrixXd hessian_kernel;  // Q_K = K' H K
  Eigen::MatrixXd hessian_slice;   // Q_S = S' H S
  double descent_residual = 0.0;   // max |T_H' H K|: the form kills orbit directions

  int slice_dim() const { return static_cast<int>(slice.cols()); }
};

class SliceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Orthonormal basis of ker d Phi_m from the exact moment-map Jacobian.
Subspace kernel_dphi(const SystemDef& sys, const Eigen::VectorXd& m);

/// (T_G, T_H): spans of the generator fields at m over g and over the
/// coadjoint isotropy algebra of mu.
std::pair<Subspace, Subspace> tangent_spaces(const SystemDef& sys, const Eigen::VectorXd& m,
                                             const Eigen::VectorXd& mu);

/// Builds the geometric slice data; throws SliceError when T_H escapes the
/// kernel or the restricted symplectic form degenerates (both indicate a
/// rank misdetection upstream).
SliceData symplectic_slice(const SystemDef& sys, const Eigen::VectorXd& m);

/// Restricts the augmented-Hamiltonian Hessian to K and to the slice.
/// Precondition (hard error): |d(h - <Phi, xi>)(m)| <= precondition_tol,
/// otherwise the Hessian is not a well-defined form. Also verifies that
/// the form vanishes on the H-orbit directions inside K (descent).
void attach_restricted_hessian(const SystemDef& sys, const Eigen::VectorXd& m,
                               const Eigen::VectorXd& xi, SliceData& data,
                               double precondition_tol = 1e-9, double descent_tol = 1e-9);

/// Convenience wrapper returning (Q_K, Q_S).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> restricted_hessian(const SystemDef& sys,
                                                               const Eigen::VectorXd& m,
                                                               const Eigen::VectorXd& xi);

enum class Verdict {
  StableCertified,
  InconclusiveIndefinite,
  InconclusiveDegenerate,
};

enum class Definiteness {
  PositiveDefinite,
  NegativeDefinite,
  PositiveSemidefinite,
  NegativeSemidefinite,
  Indefinite,
  Zero,
};

const char* to_string(Verdict v);
const char* to_string(Definiteness d);

struct StabilityThresholds {
  /// Eigenvalues below rel_definiteness * max|eigenvalue| count as zero.
  /// The scale is shared between Q_S and Q_K so both formulations classify
  /// the same numbers the same way.
  double rel_definiteness = 1e-8;
  /// Spectra entirely below this are treated as zero forms; matches the
  /// noise admitted by the precondition and descent checks.
  double absolute_zero = 1e-9;
  double precondition = 1e-9;
  double descent = 1e-9;
  double kernel_match = 1e-9;
  double metric_invariance = 1e-8;
};

struct StabilityReport {
  Verdict verdict = Verdict::InconclusiveIndefinite;
  Definiteness definiteness = Definiteness::Indefinite;
  Eigen::VectorXd slice_eigenvalues;   // ascending
  int signature_positive = 0;
  int signature_negative = 0;
  Eigen::VectorXd kernel_eigenvalues;  // of Q_K, ascending

  /// Equivalent formulation: Q_K semidefinite with kernel exactly T_H.
  Verdict kernel_formulation_verdict = Verdict::InconclusiveIndefinite;
  bool kernel_matches_orbit = false;

  /// d Phi_m surjective; with a certified verdict this is the classical
  /// regular-point case.
  bool regular_point = false;
  bool regular_case_applies = false;

  double metric_invariance_residual = 0.0;
  SliceData slice;
  StabilityThresholds thresholds;
};

/// Full verdict at a relative equilibrium: definiteness of the augmented
/// Hessian on the symplectic slice, cross-checked against the kernel
/// formulation (disagreement is an internal-consistency error). Negative
/// definite forms certify stability the same way positive definite ones do.
StabilityReport stability_verdict(const SystemDef& sys, const RelEquilibrium& re,
                                  const StabilityThresholds& thresholds = {});

}  // namespace symstab
