#pragma once

#include <Eigen/Core>

#include "symstab/phase_space.hpp"

namespace symstab {

/// A point m with a velocity xi in the algebra such that xi_M(m) = X_h(m),
/// equivalently a critical point of the augmented Hamiltonian h - <Phi, xi>.
struct RelEquilibrium {
  Eigen::VectorXd point;     // m
  Eigen::VectorXd velocity;  // xi, minimum-norm representative
  double residual = 0.0;     // |xi_M(m) - X_h(m)|_2
  Eigen::VectorXd mu;        // Phi(m)
  Subspace isotropy;         // g_m, orthonormal in the algebra metric

  /// xi must lie in the isotropy algebra of mu; the defect is |ad*_xi mu|.
  bool velocity_in_mu_isotropy = true;
  double coadjoint_defect = 0.0;

  /// xi must be metric-orthogonal to g_m (automatic for the minimum-norm
  /// solution); the defect is the largest inner product with a basis vector.
  bool velocity_orthogonal_to_isotropy = true;
  double orthogonality_defect = 0.0;
};

/// g_m = { xi : xi_M(m) = 0 }, the kernel of the generator matrix at m.
Subspace isotropy_algebra_of_point(const SystemDef& sys, const Eigen::VectorXd& m);

struct VelocitySolution {
  Eigen::VectorXd xi;
  double residual = 0.0;
};

/// Least-squares velocity: xi minimizing |xi_M(m) - X_h(m)| with minimum
/// algebra norm among minimizers, which makes it orthogonal to g_m.
VelocitySolution solve_velocity(const SystemDef& sys, const Eigen::VectorXd& m);

/// Assembles the full record (moment value, isotropy, flags) for a given
/// point and velocity, without refining.
RelEquilibrium describe_equilibrium(const SystemDef& sys, const Eigen::VectorXd& m,
                                    const Eigen::VectorXd& xi);

class RefinementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RefineOptions {
  double tolerance = 1e-13;  // on |grad (h - <Phi, xi>)|_2
  int max_iterations = 50;
};

/// Newton refinement of (m, xi) on grad(h - <Phi, xi>) = 0 with exact
/// second derivatives. Components of xi along g_{m0} are frozen at zero,
/// which removes the exact kernel from the Newton system; rank-deficient
/// steps fall back to the minimum-norm least-squares direction. Throws
/// RefinementError on divergence or stall.
RelEquilibrium refine_relative_equilibrium(const SystemDef& sys, const Eigen::VectorXd& m0,
                                           const Eigen::VectorXd& xi0,
                                           const RefineOptions& options = {});

}  // namespace symstab
