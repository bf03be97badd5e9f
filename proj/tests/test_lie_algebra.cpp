#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "support/test_support.hpp"
#include "symstab/lie_algebra.hpp"

using namespace symstab;
using symstab::testing::random_vector;

namespace {

LieAlgebraSpec so3(Eigen::MatrixXd metric = Eigen::MatrixXd::Identity(3, 3)) {
  std::vector<StructureTriple> c = {{0, 1, 2, 1.0}, {0, 2, 1, -1.0}, {1, 2, 0, 1.0}};
  return LieAlgebraSpec(3, c, std::move(metric));
}

LieAlgebraSpec heisenberg() {
  return LieAlgebraSpec(3, {{0, 1, 2, 1.0}}, Eigen::MatrixXd::Identity(3, 3));
}

Eigen::VectorXd basis3(int i) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
  e[i] = 1.0;
  return e;
}

}  // namespace

TEST_CASE("so(3) bracket reads structure constants") {
  auto alg = so3();
  CHECK((alg.bracket(basis3(0), basis3(1)) - basis3(2)).norm() == 0.0);
  CHECK((alg.bracket(basis3(1), basis3(2)) - basis3(0)).norm() == 0.0);
  CHECK((alg.bracket(basis3(2), basis3(0)) - basis3(1)).norm() == 0.0);
}

TEST_CASE("bracket antisymmetry: [x,x] = 0 for random x") {
  auto alg = so3();
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd x = random_vector(3, rng);
    CHECK(alg.bracket(x, x).norm() == 0.0);
    Eigen::VectorXd y = random_vector(3, rng);
    CHECK((alg.bracket(x, y) + alg.bracket(y, x)).norm() == 0.0);
  }
}

TEST_CASE("abelian algebra brackets vanish") {
  auto alg = LieAlgebraSpec::abelian(4);
  std::mt19937_64 rng(4);
  CHECK(alg.bracket(random_vector(4, rng), random_vector(4, rng)).norm() == 0.0);
  CHECK(alg.jacobi_residual() == 0.0);
}

TEST_CASE("construction validates invariants") {
  // Jacobi violation: an off-pattern entry on top of so(3).
  std::vector<StructureTriple> bad = {{0, 1, 2, 1.0}, {0, 2, 1, -1.0}, {1, 2, 0, 1.0},
                                      {0, 1, 1, 0.5}};
  CHECK_THROWS_AS(LieAlgebraSpec(3, bad, Eigen::MatrixXd::Identity(3, 3)),
                  std::invalid_argument);

  Eigen::MatrixXd notpd = -Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(so3(notpd), std::invalid_argument);

  Eigen::MatrixXd nonsym = Eigen::MatrixXd::Identity(3, 3);
  nonsym(0, 1) = 0.2;
  CHECK_THROWS_AS(so3(nonsym), std::invalid_argument);

  CHECK_THROWS_AS(LieAlgebraSpec(3, {{1, 0, 2, 1.0}}, Eigen::MatrixXd::Identity(3, 3)),
                  std::invalid_argument);  // i >= j
}

TEST_CASE("coadjoint isotropy") {
  SUBCASE("abelian: everything is isotropy") {
    auto alg = LieAlgebraSpec::abelian(3);
    std::mt19937_64 rng(9);
    Subspace s = coadjoint_isotropy(alg, random_vector(3, rng));
    CHECK(s.rank() == 3);
  }
  SUBCASE("so(3) at mu = e3*: the e3 axis") {
    auto alg = so3();
    Subspace s = coadjoint_isotropy(alg, basis3(2));
    REQUIRE(s.rank() == 1);
    CHECK(std::abs(std::abs(s.basis(2, 0)) - 1.0) < 1e-14);
    CHECK(std::abs(s.basis(0, 0)) < 1e-14);
    CHECK(std::abs(s.basis(1, 0)) < 1e-14);
  }
  SUBCASE("mu = 0 is fixed by everything") {
    auto alg = so3();
    CHECK(coadjoint_isotropy(alg, Eigen::VectorXd::Zero(3)).rank() == 3);
  }
  SUBCASE("center is always contained (heisenberg)") {
    auto alg = heisenberg();
    std::mt19937_64 rng(31);
    for (int i = 0; i < 20; ++i) {
      Eigen::VectorXd mu = random_vector(3, rng);
      Subspace s = coadjoint_isotropy(alg, mu);
      // e3 spans the center; it must lie in the isotropy of any mu.
      CHECK(containment_residual(s.basis, basis3(2)) < 1e-12);
    }
  }
}

TEST_CASE("orthogonal complement") {
  auto alg = so3();
  SUBCASE("complement of zero is everything") {
    Subspace z = Subspace::zero(3);
    CHECK(orthogonal_complement(alg, z).rank() == 3);
  }
  SUBCASE("standard metric: e3-perp is the e1 e2 plane") {
    Subspace s{3, basis3(2)};
    Subspace c = orthogonal_complement(alg, s);
    REQUIRE(c.rank() == 2);
    CHECK(containment_residual(c.basis, basis3(0)) < 1e-12);
    CHECK(containment_residual(c.basis, basis3(1)) < 1e-12);
  }
  SUBCASE("double complement is the original subspace") {
    std::mt19937_64 rng(12);
    Eigen::MatrixXd Q = symstab::testing::random_symmetric(3, rng);
    Q = Q * Q.transpose() + 3.0 * Eigen::MatrixXd::Identity(3, 3);
    auto alg_q = so3(Q);
    Eigen::MatrixXd raw(3, 1);
    raw << 0.3, -0.7, 0.2;
    Subspace s{3, metric_orthonormalize(raw, Q)};
    Subspace cc = orthogonal_complement(alg_q, orthogonal_complement(alg_q, s));
    // Compare column spaces via Euclidean projectors of Q-orthonormal bases
    // after re-orthonormalizing in the Euclidean sense.
    Eigen::MatrixXd a = column_space_basis(s.basis);
    Eigen::MatrixXd b = column_space_basis(cc.basis);
    CHECK(projector_distance(a, b) < 1e-10);
    CHECK(s.rank() + orthogonal_complement(alg_q, s).rank() == 3);
  }
}

TEST_CASE("metric-orthonormal projector is idempotent") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd Q = symstab::testing::random_symmetric(4, rng);
    Q = Q * Q.transpose() + 4.0 * Eigen::MatrixXd::Identity(4, 4);
    Eigen::MatrixXd raw(4, 2);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 2; ++j) raw(i, j) = symstab::uniform_symmetric(rng);
    Eigen::MatrixXd B = metric_orthonormalize(raw, Q);
    Eigen::MatrixXd P = B * B.transpose() * Q;
    CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((B.transpose() * Q * B - Eigen::MatrixXd::Identity(B.cols(), B.cols()))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
}

TEST_CASE("metric invariance check") {
  SUBCASE("so(3) with the round metric is invariant") {
    auto alg = so3();
    InvarianceReport r = check_invariance(alg, Subspace::full(3));
    CHECK(r.residual < 1e-14);
  }
  SUBCASE("abelian algebras are invariant under any metric") {
    std::mt19937_64 rng(8);
    Eigen::MatrixXd Q = symstab::testing::random_symmetric(3, rng);
    Q = Q * Q.transpose() + 3.0 * Eigen::MatrixXd::Identity(3, 3);
    auto alg = LieAlgebraSpec(3, {}, Q);
    CHECK(check_invariance(alg, Subspace::full(3)).residual == 0.0);
  }
  SUBCASE("so(3) with a squashed metric is rejected") {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(3, 3);
    Q(2, 2) = 2.0;
    auto alg = so3(Q);
    InvarianceReport r = check_invariance(alg, Subspace::full(3));
    CHECK(r.residual > 1e-3);
  }
}

TEST_CASE("zero-dimensional algebra works") {
  LieAlgebraSpec alg;
  CHECK(alg.dim() == 0);
  CHECK(alg.jacobi_residual() == 0.0);
  CHECK(alg.dual_norm_sq(Eigen::VectorXd(0)) == 0.0);
  CHECK(coadjoint_isotropy(alg, Eigen::VectorXd(0)).rank() == 0);
}
