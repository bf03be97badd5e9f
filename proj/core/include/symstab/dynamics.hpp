#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Core>

#include "symstab/equilibria.hpp"
#include "symstab/phase_space.hpp"

namespace symstab {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IntegratorOptions {
  double dt = 1e-3;
  /// Record every `record_stride` steps; 0 picks a stride giving ~2000 samples.
  int record_stride = 0;
  double newton_tol = 1e-13;
  int newton_max_iterations = 20;
};

/// Sampled trajectory with conservation monitors: h, Phi and |Phi|^2 per
/// recorded state. The implicit midpoint rule preserves quadratic moment
/// components up to the Newton tolerance; the measured drifts are stored.
struct Trajectory {
  double dt = 0.0;
  double horizon = 0.0;
  int stride = 1;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<double> energy;
  std::vector<Eigen::VectorXd> moment;
  std::vector<double> moment_norm_sq;
  double max_energy_drift = 0.0;
  Eigen::VectorXd max_moment_drift;
};

/// One implicit-midpoint step: solves z' = z + dt X_h((z + z')/2) by Newton
/// with the exact Jacobian. Reusable across steps (holds work buffers);
/// not shareable between threads.
class MidpointStepper {
 public:
  explicit MidpointStepper(const SystemDef& sys, double newton_tol = 1e-13,
                           int max_iterations = 20);

  /// Advances one step of size dt (dt == 0 returns z). On Newton failure
  /// retries with halved substeps, up to four halvings, then throws.
  Eigen::VectorXd step(const Eigen::VectorXd& z, double dt);

 private:
  Eigen::VectorXd attempt(const Eigen::VectorXd& z, double dt, int depth);

  const SystemDef* sys_;
  double tol_;
  int max_iter_;
  int n_;
  Eigen::VectorXd mid_, f_, g_, grad_, znew_;
  Eigen::MatrixXd hess_, jac_;
};

Eigen::VectorXd step_implicit_midpoint(const SystemDef& sys, const Eigen::VectorXd& z,
                                       double dt);

Trajectory integrate(const SystemDef& sys, const Eigen::VectorXd& z0, double horizon,
                     const IntegratorOptions& options = {});

/// CSV export: header `t, <coords>, h, phi_1..phi_d, phi_norm_sq`, floats
/// with 17 significant digits.
void write_trajectory_csv(const SystemDef& sys, const Trajectory& trajectory,
                          std::ostream& out);

/// Distance to the sampled H-orbit of a marked point.
///
/// Group elements come from exponentials of combinations of an isotropy
/// subalgebra basis over a bounded parameter grid (<= `budget` points,
/// identity included), followed by a local parabolic refinement of the best
/// grid cell. For parameter dimension > 3 the grid falls back to per-axis
/// one-parameter orbits and the fallback flag is set.
class OrbitSampler {
 public:
  OrbitSampler(const SystemDef& sys, Eigen::VectorXd m, const Subspace& isotropy_subalgebra,
               int budget = 10000);

  /// Min over sampled group elements of the wrapped distance |z - a.m|.
  /// Distances below `refine_below` are polished by local refinement.
  double distance(const Eigen::VectorXd& z, double refine_below = 0.05) const;

  int parameter_dim() const { return r_; }
  int grid_points() const { return static_cast<int>(cloud_.cols()); }
  double resolution() const { return cell_; }
  bool fallback() const { return fallback_; }

  /// a_t . m for the parameter vector t (time-1 flow of the combined field).
  Eigen::VectorXd orbit_point(const Eigen::VectorXd& t) const;

 private:
  double squared_distance_to(const Eigen::VectorXd& z, const Eigen::VectorXd& t) const;

  const SystemDef* sys_;
  Eigen::VectorXd m_;
  int r_ = 0;
  std::vector<Eigen::MatrixXd> basis_A_;
  std::vector<Eigen::VectorXd> basis_b_;
  Eigen::MatrixXd cloud_;               // dim x N, wrapped
  std::vector<Eigen::VectorXd> params_; // N parameter vectors
  double cell_ = 0.0;
  bool fallback_ = false;
};

enum class ProbeVerdict { NoEscapeObserved, EscapeObserved };
const char* to_string(ProbeVerdict v);

struct ProbeOptions {
  double dt = 1e-3;
  double horizon = 100.0;
  /// 0 = auto: 100 x the largest perturbation radius.
  double escape_radius = 0.0;
  int samples_per_radius = 16;
  std::uint64_t seed = 0;
  /// Added to every initial condition before the spherical perturbation.
  Eigen::VectorXd offset;
  /// Coordinate indices carrying the spherical perturbation; empty = all.
  std::vector<int> perturb_coords;
  int record_stride = 0;    // 0 = auto (~4000 records)
  int distance_stride = 0;  // in records; 0 = auto (~1000 distance samples)
  double refine_below = 0.05;
  int orbit_budget = 10000;
  /// 0 = SYMSTAB_THREADS environment variable or hardware concurrency.
  int threads = 0;
  bool keep_trajectories = false;
};

struct ProbeSample {
  int radius_index = 0;
  int sample_index = 0;
  double radius = 0.0;
  bool escaped = false;
  double escape_time = 0.0;
  double max_orbit_distance = 0.0;
  bool fit_valid = false;
  double growth_rate = 0.0;
  double fit_r_squared = 0.0;
  Trajectory trajectory;  // populated only with keep_trajectories
};

struct ProbeResult {
  std::vector<double> radii;
  std::vector<ProbeSample> samples;
  std::vector<double> max_distance_per_radius;
  ProbeVerdict verdict = ProbeVerdict::NoEscapeObserved;
  int escaped_count = 0;
  /// Mean log-linear growth rate over escaping samples; reported only when
  /// at least 10 samples escape.
  bool growth_rate_valid = false;
  double growth_rate = 0.0;
  double growth_r_squared = 0.0;
  double escape_radius = 0.0;
  double horizon = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  int orbit_parameter_dim = 0;
  int orbit_points = 0;
  double orbit_resolution = 0.0;
  bool orbit_fallback = false;
};

/// Monte Carlo stability probe: perturbs the equilibrium on spheres of the
/// given radii, integrates, and tracks the distance to the sampled H-orbit.
/// Empirical evidence only: an escape refutes stability near the orbit, a
/// quiet run does not certify it.
ProbeResult stability_probe(const SystemDef& sys, const RelEquilibrium& re,
                            const std::vector<double>& radii, const ProbeOptions& options = {});

}  // namespace symstab
