#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "support/test_support.hpp"
#include "symstab/dynamics.hpp"
#include "symstab/equilibria.hpp"
#include "symstab/linalg.hpp"
#include "symstab/system_io.hpp"

using namespace symstab;

namespace {

Eigen::VectorXd vec6(double a, double b, double c, double d, double e, double f) {
  Eigen::VectorXd v(6);
  v << a, b, c, d, e, f;
  return v;
}

RelEquilibrium equilibrium_at(const SystemDef& sys, const Eigen::VectorXd& m) {
  return refine_relative_equilibrium(sys, m, solve_velocity(sys, m).xi);
}

}  // namespace

TEST_CASE("midpoint step basics") {
  auto ex16 = builtin_system("EX16");
  SUBCASE("dt = 0 is the identity") {
    Eigen::VectorXd z = vec6(0.1, 0.2, 0.3, 0.4, 0.5, 0.6);
    CHECK((step_implicit_midpoint(ex16.system, z, 0.0) - z).norm() == 0.0);
  }
  SUBCASE("free flight is exact") {
    PhaseSpace space;
    space.n = 1;
    space.coords = {"q1", "p1"};
    space.periodic = {false, false};
    SystemDef sys = build_system("free", space, LieAlgebraSpec(), {},
                                 parse_expr("p1^2/2", space.coords), true);
    Eigen::VectorXd z(2);
    z << 0.0, 0.7;
    Eigen::VectorXd z1 = step_implicit_midpoint(sys, z, 0.25);
    CHECK(z1[0] == doctest::Approx(0.25 * 0.7).epsilon(1e-15));
    CHECK(z1[1] == doctest::Approx(0.7).epsilon(1e-15));
  }
}

TEST_CASE("one EX16 step matches the Cayley transform of the frozen linear block") {
  auto ex16 = builtin_system("EX16");
  std::mt19937_64 rng(71);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd z0 = symstab::testing::random_vector(6, rng);
    double mu = z0[5];
    double dt = 1e-3 + 0.004 * uniform_unit(rng);
    Eigen::VectorXd z1 = step_implicit_midpoint(ex16.system, z0, dt);
    CHECK(z1[5] == doctest::Approx(mu).epsilon(1e-14));

    Eigen::Matrix4d M;
    M << 0, -1, 2 * mu, 0,
         1, 0, 0, 2 * mu,
         2 * mu, 0, 0, -1,
         0, 2 * mu, 1, 0;
    Eigen::Matrix4d cay = (Eigen::Matrix4d::Identity() - 0.5 * dt * M).inverse() *
                          (Eigen::Matrix4d::Identity() + 0.5 * dt * M);
    Eigen::Vector4d w0(z0[0], z0[1], z0[3], z0[4]);
    Eigen::Vector4d w1 = cay * w0;
    Eigen::Vector4d w1_num(z1[0], z1[1], z1[3], z1[4]);
    CHECK((w1 - w1_num).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("EX16 rotation invariants over T = 100") {
  auto ex16 = builtin_system("EX16");
  // ptheta = 0: the (q,p) block rotates rigidly, so |q| and |p| are constant.
  Eigen::VectorXd z0 = vec6(1, 0, 0, 0, 1, 0);
  IntegratorOptions opt;
  opt.dt = 1e-3;
  Trajectory traj = integrate(ex16.system, z0, 100.0, opt);
  double q0 = std::hypot(z0[0], z0[1]), p0 = std::hypot(z0[3], z0[4]);
  for (const auto& z : traj.states) {
    CHECK(std::abs(std::hypot(z[0], z[1]) - q0) < 1e-9);
    CHECK(std::abs(std::hypot(z[3], z[4]) - p0) < 1e-9);
  }
  // The linear invariant ptheta is preserved to solver tolerance.
  CHECK(traj.max_moment_drift[0] < 1e-12);
}

TEST_CASE("so(3) quadratic moment components conserved to 1e-10 over T = 100") {
  auto so3 = builtin_system("SO3-oscillator");
  Eigen::VectorXd z0 = vec6(0.3, -0.2, 0.5, 0.1, 0.4, -0.3);
  IntegratorOptions opt;
  opt.dt = 1e-3;
  Trajectory traj = integrate(so3.system, z0, 100.0, opt);
  CHECK(traj.max_moment_drift.maxCoeff() < 1e-10);
  CHECK(traj.max_energy_drift < 1e-10);  // h is itself a conserved quadratic
}

TEST_CASE("finite-difference flow Jacobian is symplectic") {
  auto ex16 = builtin_system("EX16");
  const auto& sys = ex16.system;
  const double T = 5.0, eps = 1e-5;
  Eigen::VectorXd z0 = vec6(0.2, -0.1, 0.4, 0.3, 0.1, 0.05);
  IntegratorOptions opt;
  opt.dt = 1e-3;
  auto flow = [&](const Eigen::VectorXd& z) {
    return integrate(sys, z, T, opt).states.back();
  };
  Eigen::MatrixXd M(6, 6);
  for (int c = 0; c < 6; ++c) {
    Eigen::VectorXd zp = z0, zm = z0;
    zp[c] += eps;
    zm[c] -= eps;
    M.col(c) = (flow(zp) - flow(zm)) / (2 * eps);
  }
  Eigen::MatrixXd w = sys.space.omega();
  CHECK((M.transpose() * w * M - w).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("orbit distance") {
  auto ex16 = builtin_system("EX16");
  const auto& sys = ex16.system;
  Eigen::VectorXd m = vec6(0, 0, 0.7, 0, 0, 0);
  RelEquilibrium re = equilibrium_at(sys, m);
  Subspace h_alg = coadjoint_isotropy(sys.algebra, re.mu);
  OrbitSampler orbit(sys, re.point, h_alg);

  SUBCASE("distance to the marked point itself is zero") {
    CHECK(orbit.distance(m) < 1e-9);
  }
  SUBCASE("the angle direction is quotiented out") {
    for (double shift : {0.5, 2.0, -2.9}) {
      Eigen::VectorXd z = m;
      z[2] += shift;
      CHECK(orbit.distance(z) < 1e-3);  // grid + refinement
    }
  }
  SUBCASE("transverse displacement is measured exactly") {
    Eigen::VectorXd z = m;
    z[0] += 3e-3;
    z[2] -= 1.0;
    CHECK(orbit.distance(z) == doctest::Approx(3e-3).epsilon(1e-6));
  }
}

TEST_CASE("orbit distance on the so(3) circular orbit") {
  auto so3 = builtin_system("SO3-oscillator");
  const auto& sys = so3.system;
  Eigen::VectorXd m = vec6(1, 0, 0, 0, 1, 0);
  RelEquilibrium re = equilibrium_at(sys, m);
  Subspace h_alg = coadjoint_isotropy(sys.algebra, re.mu);
  REQUIRE(h_alg.rank() == 1);
  OrbitSampler orbit(sys, re.point, h_alg);

  // Rotate m about e3 by 0.3 rad: still on the H-orbit.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(6);
  for (int i = 0; i < 3; ++i) {
    A += h_alg.basis(i, 0) * sys.generators[static_cast<std::size_t>(i)].A;
    b += h_alg.basis(i, 0) * sys.generators[static_cast<std::size_t>(i)].b;
  }
  auto [E, v] = affine_flow(A, b, 0.3);
  Eigen::VectorXd z = E * m + v;
  CHECK(orbit.distance(z) < 1e-3);
  CHECK(orbit.distance(z) < 1e-8);  // refinement does much better than the grid
}

TEST_CASE("full so(3) orbit sampling in three parameters") {
  auto so3 = builtin_system("SO3-oscillator");
  const auto& sys = so3.system;
  Eigen::VectorXd m = vec6(1, 0, 0, 0, 1, 0);
  // Pretend mu = 0 so the sampler walks all of so(3).
  OrbitSampler orbit(sys, m, Subspace::full(3));
  CHECK(orbit.parameter_dim() == 3);
  CHECK_FALSE(orbit.fallback());

  Eigen::MatrixXd A = 0.2 * sys.generators[0].A + 0.1 * sys.generators[1].A +
                      0.25 * sys.generators[2].A;
  auto [E, v] = affine_flow(A, Eigen::VectorXd::Zero(6), 1.0);
  Eigen::VectorXd z = E * m;
  // The coarse 21^3 grid alone resolves ~0.2; refinement brings it down.
  CHECK(orbit.distance(z, /*refine_below=*/10.0) < 1e-3);
}

TEST_CASE("monitor identity: |Phi|^2 dominates the squared isotropy component") {
  auto so3 = builtin_system("SO3-oscillator");
  const auto& sys = so3.system;
  Eigen::VectorXd z0 = vec6(0.3, -0.2, 0.5, 0.1, 0.4, -0.3);
  IntegratorOptions opt;
  opt.dt = 1e-3;
  Trajectory traj = integrate(sys, z0, 10.0, opt);
  Subspace h_alg = coadjoint_isotropy(sys.algebra, traj.moment[0]);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    double proj_sq = 0.0;
    for (int a = 0; a < h_alg.rank(); ++a) {
      double c = traj.moment[k].dot(h_alg.basis.col(a));
      proj_sq += c * c;
    }
    CHECK(traj.moment_norm_sq[k] >= proj_sq - 1e-12);
  }
}

TEST_CASE("probe escape with a ptheta offset fits the linear growth rate") {
  auto ex16 = builtin_system("EX16");
  const auto& sys = ex16.system;
  RelEquilibrium re = equilibrium_at(sys, vec6(0, 0, 0.7, 0, 0, 0));

  ProbeOptions opt;
  opt.dt = 0.01;
  opt.horizon = 80.0;
  opt.samples_per_radius = 12;
  opt.escape_radius = 2.0;
  opt.offset = Eigen::VectorXd::Zero(6);
  opt.offset[5] = 0.05;  // growth rate 2*ptheta = 0.1
  opt.perturb_coords = {0, 1, 3, 4};

  ProbeResult probe = stability_probe(sys, re, {0.05}, opt);
  CHECK(probe.verdict == ProbeVerdict::EscapeObserved);
  CHECK(probe.escaped_count == 12);
  REQUIRE(probe.growth_rate_valid);
  CHECK(probe.growth_rate == doctest::Approx(0.1).epsilon(0.10));
  CHECK(probe.growth_r_squared > 0.99);
  for (const auto& s : probe.samples) CHECK(s.escape_time > 0.0);
}

TEST_CASE("probe without the momentum offset stays put") {
  auto ex16 = builtin_system("EX16");
  const auto& sys = ex16.system;
  RelEquilibrium re = equilibrium_at(sys, vec6(0, 0, 0.7, 0, 0, 0));

  ProbeOptions opt;
  opt.dt = 1e-3;
  opt.horizon = 20.0;
  opt.samples_per_radius = 6;
  opt.perturb_coords = {0, 1, 3, 4};

  const double delta = 1e-3;
  ProbeResult probe = stability_probe(sys, re, {delta}, opt);
  CHECK(probe.verdict == ProbeVerdict::NoEscapeObserved);
  CHECK(probe.max_distance_per_radius[0] < delta + 1e-6);
  CHECK(probe.max_distance_per_radius[0] > 0.5 * delta);
}

TEST_CASE("probe determinism: same seed, same numbers, any thread count") {
  auto so3 = builtin_system("SO3-oscillator");
  const auto& sys = so3.system;
  RelEquilibrium re = equilibrium_at(sys, vec6(1, 0, 0, 0, 1, 0));

  ProbeOptions opt;
  opt.dt = 1e-2;
  opt.horizon = 5.0;
  opt.samples_per_radius = 6;
  opt.seed = 42;

  opt.threads = 1;
  ProbeResult a = stability_probe(sys, re, {1e-3, 1e-2}, opt);
  opt.threads = 4;
  ProbeResult b = stability_probe(sys, re, {1e-3, 1e-2}, opt);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].max_orbit_distance == b.samples[i].max_orbit_distance);
    CHECK(a.samples[i].escaped == b.samples[i].escaped);
  }
}

TEST_CASE("trajectory CSV format") {
  auto ex16 = builtin_system("EX16");
  IntegratorOptions opt;
  opt.dt = 0.05;
  opt.record_stride = 10;
  Trajectory traj = integrate(ex16.system, vec6(1, 0, 0, 0, 1, 0), 1.0, opt);
  std::ostringstream out;
  write_trajectory_csv(ex16.system, traj, out);
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "t, q1, q2, theta, p1, p2, ptheta, h, phi_1, phi_norm_sq");

  // 17 significant digits: every recorded value survives the round trip
  // through text bit-exactly.
  std::getline(in, row);  // t = 0 record
  std::getline(in, row);  // first real record
  std::vector<double> fields;
  std::string cell;
  std::istringstream cells(row);
  while (std::getline(cells, cell, ',')) fields.push_back(std::stod(cell));
  REQUIRE(fields.size() == 10);
  CHECK(fields[0] == traj.times[1]);
  for (int c = 0; c < 6; ++c) CHECK(fields[static_cast<std::size_t>(c) + 1] == traj.states[1][c]);
  CHECK(fields[7] == traj.energy[1]);
  CHECK(fields[8] == traj.moment[1][0]);
  CHECK(fields[9] == traj.moment_norm_sq[1]);
}

TEST_CASE("integrate argument validation") {
  auto ex16 = builtin_system("EX16");
  CHECK_THROWS_AS(integrate(ex16.system, vec6(0, 0, 0, 0, 0, 0), -1.0, {}),
                  std::invalid_argument);
  IntegratorOptions bad;
  bad.dt = 0.0;
  CHECK_THROWS_AS(integrate(ex16.system, vec6(0, 0, 0, 0, 0, 0), 1.0, bad),
                  std::invalid_argument);
}
