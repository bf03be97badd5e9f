#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "support/test_support.hpp"
#include "symstab/dynamics.hpp"
#include "symstab/equilibria.hpp"
#include "symstab/linalg.hpp"
#include "symstab/system_io.hpp"

using namespace symstab;
using symstab::testing::random_vector;

namespace {

Eigen::VectorXd vec6(double a, double b, double c, double d, double e, double f) {
  Eigen::VectorXd v(6);
  v << a, b, c, d, e, f;
  return v;
}

}  // namespace

TEST_CASE("isotropy algebra of a point") {
  SUBCASE("EX16: the circle action never fixes a point") {
    auto ex16 = builtin_system("EX16");
    CHECK(isotropy_algebra_of_point(ex16.system, vec6(0, 0, 0.7, 0, 0, 0)).rank() == 0);
  }
  SUBCASE("so(3): no rotation fixes two independent vectors") {
    auto so3 = builtin_system("SO3-oscillator");
    CHECK(isotropy_algebra_of_point(so3.system, vec6(1, 0, 0, 0, 1, 0)).rank() == 0);
  }
  SUBCASE("so(3): the origin is fixed by everything") {
    auto so3 = builtin_system("SO3-oscillator");
    CHECK(isotropy_algebra_of_point(so3.system, Eigen::VectorXd::Zero(6)).rank() == 3);
  }
  SUBCASE("so(3): points on the q3 axis keep the e3 rotations") {
    auto so3 = builtin_system("SO3-oscillator");
    Subspace s = isotropy_algebra_of_point(so3.system, vec6(0, 0, 1, 0, 0, 0.5));
    REQUIRE(s.rank() == 1);
    CHECK(std::abs(std::abs(s.basis(2, 0)) - 1.0) < 1e-12);
  }
}

TEST_CASE("solve_velocity") {
  SUBCASE("EX16 equilibrium: xi = 0, residual 0") {
    auto ex16 = builtin_system("EX16");
    auto sol = solve_velocity(ex16.system, vec6(0, 0, 0.7, 0, 0, 0));
    CHECK(sol.xi.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sol.residual == 0.0);
  }
  SUBCASE("so(3) oscillator: xi = e3 exactly") {
    auto so3 = builtin_system("SO3-oscillator");
    auto sol = solve_velocity(so3.system, vec6(1, 0, 0, 0, 1, 0));
    CHECK(std::abs(sol.xi[0]) < 1e-14);
    CHECK(std::abs(sol.xi[1]) < 1e-14);
    CHECK(sol.xi[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.residual < 1e-14);
  }
  SUBCASE("generic point still returns the best fit") {
    auto ex16 = builtin_system("EX16");
    auto sol = solve_velocity(ex16.system, vec6(1, 0, 0, 0, 0, 0));
    CHECK(sol.residual == doctest::Approx(1.0));  // |X_h| component outside the orbit
  }
}

TEST_CASE("velocity is orthogonal to the isotropy algebra") {
  auto so3 = builtin_system("SO3-oscillator");
  // On the q3 axis with p = 0 the isotropy is span{e3}; the minimum-norm
  // velocity must be orthogonal to it.
  Eigen::VectorXd m = vec6(0, 0, 1.2, 0, 0, 0.4);
  auto sol = solve_velocity(so3.system, m);
  Subspace iso = isotropy_algebra_of_point(so3.system, m);
  for (int a = 0; a < iso.rank(); ++a)
    CHECK(std::abs(so3.system.algebra.inner(sol.xi, iso.basis.col(a))) < 1e-10);
}

TEST_CASE("describe_equilibrium flags") {
  auto so3 = builtin_system("SO3-oscillator");
  Eigen::VectorXd m = vec6(1, 0, 0, 0, 1, 0);
  RelEquilibrium re = describe_equilibrium(so3.system, m, solve_velocity(so3.system, m).xi);
  CHECK(re.residual < 1e-14);
  CHECK(re.velocity_in_mu_isotropy);  // e3 fixes mu = e3*
  CHECK(re.velocity_orthogonal_to_isotropy);
  CHECK(re.isotropy.rank() == 0);
  CHECK((re.mu - Eigen::Vector3d(0, 0, 1)).norm() < 1e-14);
}

TEST_CASE("refinement") {
  SUBCASE("exact equilibrium is returned unchanged") {
    auto ex16 = builtin_system("EX16");
    Eigen::VectorXd m = vec6(0, 0, 0.7, 0, 0, 0);
    RelEquilibrium re = refine_relative_equilibrium(ex16.system, m, Eigen::VectorXd::Zero(1));
    CHECK((re.point - m).norm() == 0.0);
    CHECK(re.residual == 0.0);
  }
  SUBCASE("perturbed EX16 point converges back to q = p = 0") {
    auto ex16 = builtin_system("EX16");
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 5; ++rep) {
      Eigen::VectorXd m0 = vec6(0, 0, 0.7, 0, 0, 0);
      for (int c : {0, 1, 3, 4}) m0[c] += 1e-3 * uniform_symmetric(rng);
      RelEquilibrium re =
          refine_relative_equilibrium(ex16.system, m0, Eigen::VectorXd::Zero(1));
      CHECK(re.residual < 1e-12);
      CHECK(std::abs(re.point[0]) < 1e-10);
      CHECK(std::abs(re.point[1]) < 1e-10);
      CHECK(std::abs(re.point[3]) < 1e-10);
      CHECK(std::abs(re.point[4]) < 1e-10);
    }
  }
  SUBCASE("so(3) circular orbit perturbed radially reconverges") {
    auto so3 = builtin_system("SO3-oscillator");
    Eigen::VectorXd m0 = vec6(1.05, 0, 0, 0, 1, 0);
    Eigen::VectorXd xi0(3);
    xi0 << 0, 0, 1;
    RelEquilibrium re = refine_relative_equilibrium(so3.system, m0, xi0);
    CHECK(re.residual < 1e-12);
    CHECK((re.point - m0).norm() < 0.2);  // stays near the entry orbit
  }
  SUBCASE("far-from-critical start diverges or stalls") {
    auto so3 = builtin_system("SO3-oscillator");
    // The only critical structure is at |q| = |p|, q.p = 0 style circles;
    // a wild point with an enormous velocity guess should not converge
    // within the iteration budget.
    Eigen::VectorXd m0 = vec6(4, -3, 2, 5, 6, -7);
    Eigen::VectorXd xi0(3);
    xi0 << 50, 50, 50;
    CHECK_THROWS_AS(
        refine_relative_equilibrium(so3.system, m0, xi0, {1e-13, 3}),
        RefinementError);
  }
}

TEST_CASE("flow check: exp(t xi) . m tracks the Hamiltonian flow") {
  auto so3 = builtin_system("SO3-oscillator");
  const auto& sys = so3.system;
  Eigen::VectorXd m = vec6(1, 0, 0, 0, 1, 0);
  RelEquilibrium re = refine_relative_equilibrium(sys, m, solve_velocity(sys, m).xi);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(6);
  for (int i = 0; i < 3; ++i) {
    A += re.velocity[i] * sys.generators[static_cast<std::size_t>(i)].A;
    b += re.velocity[i] * sys.generators[static_cast<std::size_t>(i)].b;
  }

  IntegratorOptions opt;
  opt.dt = 2e-4;
  opt.record_stride = 500;  // every 0.1 time units
  Trajectory traj = integrate(sys, re.point, 1.0, opt);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    auto [E, v] = affine_flow(A, b, traj.times[k]);
    Eigen::VectorXd group_point = E * re.point + v;
    CHECK((group_point - traj.states[k]).norm() < 1e-6);
  }
}
