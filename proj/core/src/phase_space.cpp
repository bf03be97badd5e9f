#include "symstab/phase_space.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "symstab/rng.hpp"

namespace symstab {

namespace {

constexpr double kSpTol = 1e-10;
constexpr double kMomentFieldTol = 1e-10;
constexpr double kEquivarianceTol = 1e-8;
constexpr double kInvarianceTol = 1e-8;
constexpr std::uint64_t kValidationSeed = 0x5f3759df9e3779b9ULL;

double wrap_angle(double x) {
  x = std::fmod(x + M_PI, 2.0 * M_PI);
  if (x < 0) x += 2.0 * M_PI;
  return x - M_PI;
}

}  // namespace

Eigen::MatrixXd PhaseSpace::omega() const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim(), dim());
  for (int i = 0; i < n; ++i) {
    w(i, n + i) = 1.0;
    w(n + i, i) = -1.0;
  }
  return w;
}

Eigen::VectorXd PhaseSpace::omega_apply(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(dim());
  out.head(n) = v.tail(n);
  out.tail(n) = -v.head(n);
  return out;
}

Eigen::VectorXd PhaseSpace::wrapped_delta(const Eigen::VectorXd& a,
                                          const Eigen::VectorXd& b) const {
  Eigen::VectorXd d = a - b;
  for (int i = 0; i < dim(); ++i)
    if (periodic[static_cast<std::size_t>(i)]) d[i] = wrap_angle(d[i]);
  return d;
}

double PhaseSpace::wrapped_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  return wrapped_delta(a, b).norm();
}

int PhaseSpace::coordinate_index(const std::string& name) const {
  for (std::size_t i = 0; i < coords.size(); ++i)
    if (coords[i] == name) return static_cast<int>(i);
  return -1;
}

Eigen::MatrixXd SystemDef::generator_matrix(const Eigen::VectorXd& z) const {
  Eigen::MatrixXd G(dim(), algebra_dim());
  for (int i = 0; i < algebra_dim(); ++i) {
    const auto& g = generators[static_cast<std::size_t>(i)];
    G.col(i) = g.A * z + g.b;
  }
  return G;
}

Eigen::VectorXd SystemDef::augmented_gradient(const Eigen::VectorXd& z,
                                              const Eigen::VectorXd& xi) const {
  Eigen::VectorXd g = hamiltonian->gradient(z);
  for (int k = 0; k < algebra_dim(); ++k)
    if (xi[k] != 0.0) g -= xi[k] * moment[static_cast<std::size_t>(k)]->gradient(z);
  return g;
}

Eigen::MatrixXd SystemDef::augmented_hessian(const Eigen::VectorXd& z,
                                             const Eigen::VectorXd& xi) const {
  Eigen::MatrixXd h = hamiltonian->hessian(z);
  for (int k = 0; k < algebra_dim(); ++k)
    if (xi[k] != 0.0) h -= xi[k] * moment[static_cast<std::size_t>(k)]->hessian(z);
  return h;
}

Eigen::MatrixXd SystemDef::moment_jacobian(const Eigen::VectorXd& z) const {
  Eigen::MatrixXd J(algebra_dim(), dim());
  for (int i = 0; i < algebra_dim(); ++i)
    J.row(i) = moment[static_cast<std::size_t>(i)]->gradient(z).transpose();
  return J;
}

Eigen::VectorXd hamiltonian_vector_field(const PhaseSpace& space, const ScalarField& f,
                                         const Eigen::VectorXd& z) {
  return space.omega_apply(f.gradient(z));
}

Eigen::VectorXd hamiltonian_vector_field(const SystemDef& sys, const Eigen::VectorXd& z) {
  return hamiltonian_vector_field(sys.space, *sys.hamiltonian, z);
}

Expr moment_component_expr(const PhaseSpace& space, const ActionGenerator& gen) {
  const int dim = space.dim();
  Eigen::MatrixXd omega = space.omega();
  Eigen::MatrixXd S = omega * gen.A;
  S = 0.5 * (S + S.transpose());  // exactly symmetric for sp matrices
  Eigen::VectorXd v = -(omega * gen.b);
  std::vector<Expr> terms;
  for (int i = 0; i < dim; ++i) {
    if (S(i, i) != 0.0)
      terms.push_back(Expr::constant(-0.5 * S(i, i)) *
                      Expr::pow(Expr::coordinate(i), 2));
    for (int j = i + 1; j < dim; ++j)
      if (S(i, j) != 0.0)
        terms.push_back(Expr::constant(-S(i, j)) * Expr::coordinate(i) * Expr::coordinate(j));
  }
  for (int i = 0; i < dim; ++i)
    if (v[i] != 0.0) terms.push_back(Expr::constant(v[i]) * Expr::coordinate(i));
  if (gen.moment_constant != 0.0) terms.push_back(Expr::constant(gen.moment_constant));
  return Expr::sum(std::move(terms));
}

Expr poisson_bracket(const PhaseSpace& space, const Expr& f, const Expr& g) {
  std::vector<Expr> terms;
  for (int i = 0; i < space.n; ++i) {
    Expr fq = f.derivative(i), fp = f.derivative(space.n + i);
    Expr gq = g.derivative(i), gp = g.derivative(space.n + i);
    if (!fq.is_zero() && !gp.is_zero()) terms.push_back(fq * gp);
    if (!fp.is_zero() && !gq.is_zero()) terms.push_back(Expr::negate(fp * gq));
  }
  return Expr::sum(std::move(terms));
}

Eigen::VectorXd random_phase_point(const PhaseSpace& space, std::mt19937_64& rng) {
  Eigen::VectorXd z(space.dim());
  for (int i = 0; i < space.dim(); ++i) {
    double u = uniform_symmetric(rng);
    z[i] = space.periodic[static_cast<std::size_t>(i)] ? u * M_PI : u;
  }
  return z;
}

EquivarianceResult validate_equivariance(const PhaseSpace& space, const LieAlgebraSpec& algebra,
                                         const std::vector<Expr>& components, int sample_points,
                                         std::mt19937_64& rng) {
  const int d = algebra.dim();
  EquivarianceResult result;
  result.constants = Eigen::VectorXd::Zero(d);
  if (d < 2) return result;

  struct PairDefect {
    int i, j;
    Expr defect;  // {phi_i, phi_j} - sum_k c_ij^k phi_k, constants at zero
  };
  std::vector<PairDefect> defects;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Expr pb = poisson_bracket(space, components[static_cast<std::size_t>(i)],
                                components[static_cast<std::size_t>(j)]);
      std::vector<Expr> terms{pb};
      const Eigen::VectorXd& c = algebra.structure(i, j);
      for (int k = 0; k < d; ++k)
        if (c[k] != 0.0)
          terms.push_back(Expr::constant(-c[k]) * components[static_cast<std::size_t>(k)]);
      defects.push_back({i, j, Expr::sum(std::move(terms))});
    }

  // Solve sum_k c_{ij}^k const_k = defect_ij(0) for the moment constants.
  const int pairs = static_cast<int>(defects.size());
  Eigen::MatrixXd A(pairs, d);
  Eigen::VectorXd rhs(pairs);
  Eigen::VectorXd origin = Eigen::VectorXd::Zero(space.dim());
  for (int p = 0; p < pairs; ++p) {
    A.row(p) = algebra.structure(defects[static_cast<std::size_t>(p)].i,
                                 defects[static_cast<std::size_t>(p)].j)
                   .transpose();
    rhs[p] = defects[static_cast<std::size_t>(p)].defect.eval(origin);
  }
  result.constants = lstsq_min_norm(A, rhs);

  std::vector<Eigen::VectorXd> points;
  points.reserve(static_cast<std::size_t>(sample_points));
  for (int s = 0; s < sample_points; ++s) points.push_back(random_phase_point(space, rng));

  for (int p = 0; p < pairs; ++p) {
    double target = A.row(p).dot(result.constants);
    for (const auto& z : points) {
      double v = std::abs(defects[static_cast<std::size_t>(p)].defect.eval(z) - target);
      if (v > result.residual) {
        result.residual = v;
        result.worst_i = defects[static_cast<std::size_t>(p)].i;
        result.worst_j = defects[static_cast<std::size_t>(p)].j;
      }
    }
  }
  result.consistent = result.residual < kEquivarianceTol;
  return result;
}

Eigen::VectorXd moment_map(const SystemDef& sys, const Eigen::VectorXd& z) {
  Eigen::VectorXd mu(sys.algebra_dim());
  for (int i = 0; i < sys.algebra_dim(); ++i)
    mu[i] = sys.moment[static_cast<std::size_t>(i)]->value(z);
  return mu;
}

double moment_norm_sq(const SystemDef& sys, const Eigen::VectorXd& z) {
  return sys.algebra.dual_norm_sq(moment_map(sys, z));
}

SystemDef build_system(std::string name, PhaseSpace space, LieAlgebraSpec algebra,
                       std::vector<ActionGenerator> generators, Expr hamiltonian,
                       bool proper_action_asserted) {
  std::vector<CheckResult> checks;
  auto add_check = [&checks](std::string id, double residual, double tol, std::string detail) {
    checks.push_back({std::move(id), residual < tol, residual, tol, std::move(detail)});
  };

  const int dim = space.dim();
  const int d = algebra.dim();
  if (space.n <= 0) throw std::invalid_argument("phase space needs n >= 1");
  if (static_cast<int>(space.coords.size()) != dim ||
      static_cast<int>(space.periodic.size()) != dim)
    throw std::invalid_argument("phase space: coords/periodic must have size 2n");
  if (static_cast<int>(generators.size()) != d)
    throw std::invalid_argument("one action generator per algebra basis element required");
  if (hamiltonian.min_dimension() > dim)
    throw std::invalid_argument("hamiltonian references undeclared coordinates");

  Eigen::MatrixXd omega = space.omega();

  // Generator shape, sp-condition and the periodic-mixing rule.
  for (int g = 0; g < d; ++g) {
    const auto& gen = generators[static_cast<std::size_t>(g)];
    if (gen.A.rows() != dim || gen.A.cols() != dim || gen.b.size() != dim)
      throw std::invalid_argument("generator " + std::to_string(g + 1) + " has wrong shape");
    double sp = (omega * gen.A + gen.A.transpose() * omega).cwiseAbs().maxCoeff();
    add_check("sp_condition", sp, kSpTol, "generator " + std::to_string(g + 1));
    double mix = 0.0;
    for (int c = 0; c < dim; ++c) {
      if (!space.periodic[static_cast<std::size_t>(c)]) continue;
      for (int r = 0; r < dim; ++r)
        if (!space.periodic[static_cast<std::size_t>(r)])
          mix = std::max(mix, std::abs(gen.A(r, c)));
    }
    add_check("periodic_mixing", mix, 1e-12,
              "generator " + std::to_string(g + 1) + " feeds a periodic angle into a non-periodic coordinate");
  }

  std::mt19937_64 rng(kValidationSeed);
  std::vector<Eigen::VectorXd> points;
  for (int s = 0; s < 100; ++s) points.push_back(random_phase_point(space, rng));

  // Assemble raw moment components and verify X_phi = A z + b pointwise.
  std::vector<Expr> raw_components;
  for (int g = 0; g < d; ++g) {
    ActionGenerator gen = generators[static_cast<std::size_t>(g)];
    gen.moment_constant = 0.0;
    raw_components.push_back(moment_component_expr(space, gen));
  }
  for (int g = 0; g < d; ++g) {
    ScalarField phi(raw_components[static_cast<std::size_t>(g)], dim);
    const auto& gen = generators[static_cast<std::size_t>(g)];
    double worst = 0.0;
    for (const auto& z : points) {
      Eigen::VectorXd lhs = space.omega_apply(phi.gradient(z));
      worst = std::max(worst, (lhs - (gen.A * z + gen.b)).cwiseAbs().maxCoeff());
    }
    add_check("moment_generates_action", worst, kMomentFieldTol,
              "generator " + std::to_string(g + 1));
  }

  // Equivariance with solved constants.
  EquivarianceResult equiv = validate_equivariance(space, algebra, raw_components, 200, rng);
  {
    std::ostringstream detail;
    if (equiv.worst_i >= 0)
      detail << "worst pair (" << equiv.worst_i + 1 << ", " << equiv.worst_j + 1 << ")";
    add_check("equivariance", equiv.residual, kEquivarianceTol, detail.str());
  }
  std::vector<Expr> components;
  for (int g = 0; g < d; ++g) {
    Expr phi = raw_components[static_cast<std::size_t>(g)];
    if (equiv.constants[g] != 0.0) phi = phi + Expr::constant(equiv.constants[g]);
    components.push_back(std::move(phi));
    generators[static_cast<std::size_t>(g)].moment_constant = equiv.constants[g];
  }

  // G-invariance of h: the Lie derivative of h along each generator field
  // vanishes. Built symbolically, spot-checked at the sample points.
  ScalarField h_field(hamiltonian, dim);
  for (int g = 0; g < d; ++g) {
    const auto& gen = generators[static_cast<std::size_t>(g)];
    std::vector<Expr> terms;
    for (int i = 0; i < dim; ++i) {
      Expr dh = hamiltonian.derivative(i);
      if (dh.is_zero()) continue;
      std::vector<Expr> lin;
      for (int j = 0; j < dim; ++j)
        if (gen.A(i, j) != 0.0)
          lin.push_back(Expr::constant(gen.A(i, j)) * Expr::coordinate(j));
      if (gen.b[i] != 0.0) lin.push_back(Expr::constant(gen.b[i]));
      if (lin.empty()) continue;
      terms.push_back(dh * Expr::sum(std::move(lin)));
    }
    Expr lie_derivative = Expr::sum(std::move(terms));
    double worst = 0.0;
    for (const auto& z : points) worst = std::max(worst, std::abs(lie_derivative.eval(z)));
    add_check("h_invariance", worst, kInvarianceTol, "generator " + std::to_string(g + 1));
  }

  // 2pi-periodicity of h in each angle coordinate.
  for (int c = 0; c < dim; ++c) {
    if (!space.periodic[static_cast<std::size_t>(c)]) continue;
    double worst = 0.0;
    for (const auto& z : points) {
      Eigen::VectorXd shifted = z;
      shifted[c] += 2.0 * M_PI;
      worst = std::max(worst, std::abs(h_field.value(shifted) - h_field.value(z)));
    }
    add_check("h_periodicity", worst, kInvarianceTol, "coordinate " + space.coords[static_cast<std::size_t>(c)]);
  }

  bool all_ok = true;
  for (const auto& c : checks) all_ok = all_ok && c.ok;
  if (!all_ok) {
    std::ostringstream msg;
    msg << "system '" << name << "' failed validation:";
    for (const auto& c : checks)
      if (!c.ok)
        msg << " [" << c.id << " residual " << c.residual << " tol " << c.tolerance
            << (c.detail.empty() ? "" : " " + c.detail) << "]";
    throw SystemValidationError(msg.str(), std::move(checks));
  }

  SystemDef sys{std::move(name),
                std::move(space),
                std::move(algebra),
                std::move(generators),
                hamiltonian,
                std::make_shared<const ScalarField>(hamiltonian, dim),
                {},
                {},
                proper_action_asserted,
                std::move(checks)};
  for (auto& phi : components) {
    sys.moment.push_back(std::make_shared<const ScalarField>(phi, dim));
    sys.moment_exprs.push_back(std::move(phi));
  }
  return sys;
}

}  // namespace symstab
