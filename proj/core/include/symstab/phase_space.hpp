#pragma once

#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "symstab/expr.hpp"
#include "symstab/lie_algebra.hpp"

namespace symstab {

/// Flat symplectic phase space R^{2n} with coordinates ordered
/// (q_1..q_n, p_1..p_n) and omega = sum dq_i ^ dp_i. Angle coordinates may
/// be flagged periodic (identified mod 2pi).
struct PhaseSpace {
  int n = 0;
  std::vector<std::string> coords;  // size 2n
  std::vector<bool> periodic;       // size 2n

  int dim() const { return 2 * n; }

  /// Omega with omega(u, v) = u' Omega v: +1 at (q_i, p_i), -1 at (p_i, q_i).
  Eigen::MatrixXd omega() const;

  /// Applies Omega without forming it: (Omega v)_q = v_p, (Omega v)_p = -v_q.
  Eigen::VectorXd omega_apply(const Eigen::VectorXd& v) const;

  /// Componentwise difference with periodic coordinates wrapped to [-pi, pi].
  Eigen::VectorXd wrapped_delta(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  double wrapped_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  int coordinate_index(const std::string& name) const;  // -1 if absent
};

/// One Lie-algebra basis element's affine action on phase space:
/// xi_M(z) = A z + b. The moment constant is solved during system
/// validation, not user-supplied.
struct ActionGenerator {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  double moment_constant = 0.0;
};

/// One validation check with its measured residual.
struct CheckResult {
  std::string id;
  bool ok = true;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

class SystemValidationError : public std::runtime_error {
 public:
  SystemValidationError(std::string message, std::vector<CheckResult> checks)
      : std::runtime_error(std::move(message)), checks_(std::move(checks)) {}
  const std::vector<CheckResult>& checks() const { return checks_; }

 private:
  std::vector<CheckResult> checks_;
};

/// A fully validated system: phase space, symmetry algebra, affine action,
/// invariant Hamiltonian, and the assembled equivariant moment map.
/// Immutable after construction; safe to share read-only across threads.
struct SystemDef {
  std::string name;
  PhaseSpace space;
  LieAlgebraSpec algebra;
  std::vector<ActionGenerator> generators;
  Expr hamiltonian_expr;
  std::shared_ptr<const ScalarField> hamiltonian;
  std::vector<Expr> moment_exprs;  // constants already folded in
  std::vector<std::shared_ptr<const ScalarField>> moment;
  bool proper_action_asserted = false;
  std::vector<CheckResult> validation;

  int dim() const { return space.dim(); }
  int algebra_dim() const { return algebra.dim(); }

  /// 2n x d matrix whose column i is xi_M(z) for basis element e_i.
  Eigen::MatrixXd generator_matrix(const Eigen::VectorXd& z) const;

  /// Gradient and Hessian of the augmented Hamiltonian h - <Phi, xi>.
  Eigen::VectorXd augmented_gradient(const Eigen::VectorXd& z, const Eigen::VectorXd& xi) const;
  Eigen::MatrixXd augmented_hessian(const Eigen::VectorXd& z, const Eigen::VectorXd& xi) const;

  /// d x 2n Jacobian of the moment map at z (row i = grad Phi_i).
  Eigen::MatrixXd moment_jacobian(const Eigen::VectorXd& z) const;
};

/// X_f(z) = Omega grad f(z): qdot_i = df/dp_i, pdot_i = -df/dq_i.
Eigen::VectorXd hamiltonian_vector_field(const PhaseSpace& space, const ScalarField& f,
                                         const Eigen::VectorXd& z);
Eigen::VectorXd hamiltonian_vector_field(const SystemDef& sys, const Eigen::VectorXd& z);

/// Quadratic moment component phi with X_phi = A z + b:
/// phi(z) = -1/2 z'(Omega A)z - (Omega b).z + c.
Expr moment_component_expr(const PhaseSpace& space, const ActionGenerator& gen);

/// {f, g} = sum_i df/dq_i dg/dp_i - df/dp_i dg/dq_i, as an expression.
Expr poisson_bracket(const PhaseSpace& space, const Expr& f, const Expr& g);

/// Deterministic validation sample: uniform in [-1,1] per coordinate,
/// [-pi,pi] for periodic ones.
Eigen::VectorXd random_phase_point(const PhaseSpace& space, std::mt19937_64& rng);

struct EquivarianceResult {
  Eigen::VectorXd constants;   // solved moment constants c_i
  double residual = 0.0;       // max defect over pairs and sample points
  int worst_i = -1, worst_j = -1;
  bool consistent = true;      // false when the defect is not constant
};

/// Checks {Phi_i, Phi_j} = sum_k c_{ij}^k Phi_k after solving for the
/// moment constants (least squares over the defects' constant parts).
EquivarianceResult validate_equivariance(const PhaseSpace& space, const LieAlgebraSpec& algebra,
                                         const std::vector<Expr>& components, int sample_points,
                                         std::mt19937_64& rng);

Eigen::VectorXd moment_map(const SystemDef& sys, const Eigen::VectorXd& z);
/// |Phi(z)|^2 in the dual metric Q^{-1}.
double moment_norm_sq(const SystemDef& sys, const Eigen::VectorXd& z);

/// Assembles and validates a SystemDef. Collects every check; throws
/// SystemValidationError (with the full check list) if any fails.
SystemDef build_system(std::string name, PhaseSpace space, LieAlgebraSpec algebra,
                       std::vector<ActionGenerator> generators, Expr hamiltonian,
                       bool proper_action_asserted = false);

}  // namespace symstab
