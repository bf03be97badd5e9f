#include <benchmark/benchmark.h>

#include "symstab/dynamics.hpp"
#include "symstab/equilibria.hpp"
#include "symstab/slice.hpp"
#include "symstab/system_io.hpp"

using namespace symstab;

namespace {

const LoadedSystem& ex16() {
  static LoadedSystem sys = builtin_system("EX16");
  return sys;
}

const LoadedSystem& so3() {
  static LoadedSystem sys = builtin_system("SO3-oscillator");
  return sys;
}

Eigen::VectorXd sample_state() {
  Eigen::VectorXd z(6);
  z << 0.4, -0.3, 0.1, 0.2, 0.5, 0.0;
  return z;
}

void bm_expr_tree_eval(benchmark::State& state) {
  const Expr& h = ex16().system.hamiltonian_expr;
  Eigen::VectorXd z = sample_state();
  for (auto _ : state) benchmark::DoNotOptimize(h.eval(z));
}
BENCHMARK(bm_expr_tree_eval);

void bm_expr_compiled_eval(benchmark::State& state) {
  const CompiledExpr& h = ex16().system.hamiltonian->compiled();
  Eigen::VectorXd z = sample_state();
  for (auto _ : state) benchmark::DoNotOptimize(h.eval(z.data()));
}
BENCHMARK(bm_expr_compiled_eval);

void bm_gradient(benchmark::State& state) {
  const ScalarField& h = *ex16().system.hamiltonian;
  Eigen::VectorXd z = sample_state();
  Eigen::VectorXd g(6);
  for (auto _ : state) {
    h.gradient_into(z.data(), g);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(bm_gradient);

void bm_midpoint_step(benchmark::State& state) {
  const SystemDef& sys = ex16().system;
  MidpointStepper stepper(sys);
  Eigen::VectorXd z = sample_state();
  for (auto _ : state) {
    z = stepper.step(z, 1e-3);
    benchmark::DoNotOptimize(z.data());
  }
}
BENCHMARK(bm_midpoint_step);

void bm_orbit_distance(benchmark::State& state) {
  const SystemDef& sys = so3().system;
  Eigen::VectorXd m(6);
  m << 1, 0, 0, 0, 1, 0;
  RelEquilibrium re = describe_equilibrium(sys, m, solve_velocity(sys, m).xi);
  OrbitSampler orbit(sys, re.point, coadjoint_isotropy(sys.algebra, re.mu));
  Eigen::VectorXd z = m;
  z[0] += 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(orbit.distance(z));
}
BENCHMARK(bm_orbit_distance);

void bm_stability_verdict(benchmark::State& state) {
  const SystemDef& sys = so3().system;
  Eigen::VectorXd m(6);
  m << 1, 0, 0, 0, 1, 0;
  RelEquilibrium re = describe_equilibrium(sys, m, solve_velocity(sys, m).xi);
  for (auto _ : state) benchmark::DoNotOptimize(stability_verdict(sys, re).verdict);
}
BENCHMARK(bm_stability_verdict);

void bm_refine(benchmark::State& state) {
  const SystemDef& sys = so3().system;
  Eigen::VectorXd m(6);
  m << 1.01, 0, 0, 0, 1, 0;
  Eigen::VectorXd xi(3);
  xi << 0, 0, 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(refine_relative_equilibrium(sys, m, xi).residual);
}
BENCHMARK(bm_refine);

}  // namespace

BENCHMARK_MAIN();
