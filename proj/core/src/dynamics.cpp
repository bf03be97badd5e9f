#include "symstab/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <thread>

#include <Eigen/Dense>

#include "symstab/linalg.hpp"
#include "symstab/rng.hpp"

namespace symstab {

const char* to_string(ProbeVerdict v) {
  return v == ProbeVerdict::EscapeObserved ? "ESCAPE_OBSERVED" : "NO_ESCAPE_OBSERVED";
}

// ---------------------------------------------------------------------------
// Implicit midpoint
// ---------------------------------------------------------------------------

MidpointStepper::MidpointStepper(const SystemDef& sys, double newton_tol, int max_iterations)
    : sys_(&sys), tol_(newton_tol), max_iter_(max_iterations), n_(sys.space.n) {
  const int dim = sys.dim();
  mid_.resize(dim);
  f_.resize(dim);
  g_.resize(dim);
  grad_.resize(dim);
  znew_.resize(dim);
  hess_.resize(dim, dim);
  jac_.resize(dim, dim);
}

Eigen::VectorXd MidpointStepper::step(const Eigen::VectorXd& z, double dt) {
  if (dt == 0.0) return z;
  return attempt(z, dt, 0);
}

Eigen::VectorXd MidpointStepper::attempt(const Eigen::VectorXd& z, double dt, int depth) {
  const int dim = sys_->dim();
  const ScalarField& h = *sys_->hamiltonian;

  // Euler predictor.
  h.gradient_into(z.data(), grad_);
  f_.head(n_) = grad_.tail(n_);
  f_.tail(n_) = -grad_.head(n_);
  znew_ = z + dt * f_;

  const double scale = std::max(1.0, z.cwiseAbs().maxCoeff());
  for (int iter = 0; iter < max_iter_; ++iter) {
    mid_ = 0.5 * (z + znew_);
    h.gradient_into(mid_.data(), grad_);
    f_.head(n_) = grad_.tail(n_);
    f_.tail(n_) = -grad_.head(n_);
    g_ = znew_ - z - dt * f_;
    if (g_.cwiseAbs().maxCoeff() < tol_ * scale) {
      if (!znew_.allFinite()) throw IntegrationError("midpoint step produced non-finite state");
      return znew_;
    }
    h.hessian_into(mid_.data(), hess_);
    // J = I - (dt/2) Omega H, assembled blockwise.
    jac_.topRows(n_) = -(0.5 * dt) * hess_.bottomRows(n_);
    jac_.bottomRows(n_) = (0.5 * dt) * hess_.topRows(n_);
    jac_ += Eigen::MatrixXd::Identity(dim, dim);
    znew_ += jac_.partialPivLu().solve(-g_);
    if (!znew_.allFinite()) break;
  }

  if (depth >= 4)
    throw IntegrationError("implicit midpoint Newton failed to converge after 4 step halvings");
  Eigen::VectorXd zm = attempt(z, dt / 2.0, depth + 1);
  return attempt(zm, dt / 2.0, depth + 1);
}

Eigen::VectorXd step_implicit_midpoint(const SystemDef& sys, const Eigen::VectorXd& z,
                                       double dt) {
  MidpointStepper stepper(sys);
  return stepper.step(z, dt);
}

Trajectory integrate(const SystemDef& sys, const Eigen::VectorXd& z0, double horizon,
                     const IntegratorOptions& options) {
  if (!(horizon > 0.0) || !(options.dt > 0.0))
    throw std::invalid_argument("integrate: horizon and dt must be positive");
  const long steps = std::lround(horizon / options.dt);
  int stride = options.record_stride;
  if (stride <= 0) stride = static_cast<int>(std::max(1L, steps / 2000));

  Trajectory traj;
  traj.dt = options.dt;
  traj.horizon = horizon;
  traj.stride = stride;
  traj.max_moment_drift = Eigen::VectorXd::Zero(sys.algebra_dim());

  MidpointStepper stepper(sys, options.newton_tol, options.newton_max_iterations);
  Eigen::VectorXd z = z0;

  auto record = [&](double t, const Eigen::VectorXd& state) {
    traj.times.push_back(t);
    traj.states.push_back(state);
    traj.energy.push_back(sys.hamiltonian->value(state));
    Eigen::VectorXd mu = moment_map(sys, state);
    traj.moment.push_back(mu);
    traj.moment_norm_sq.push_back(sys.algebra.dual_norm_sq(mu));
  };
  record(0.0, z);

  for (long k = 1; k <= steps; ++k) {
    z = stepper.step(z, options.dt);
    if (k % stride == 0 || k == steps) record(static_cast<double>(k) * options.dt, z);
  }

  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    traj.max_energy_drift =
        std::max(traj.max_energy_drift, std::abs(traj.energy[i] - traj.energy[0]));
    for (int c = 0; c < sys.algebra_dim(); ++c)
      traj.max_moment_drift[c] = std::max(traj.max_moment_drift[c],
                                          std::abs(traj.moment[i][c] - traj.moment[0][c]));
  }
  return traj;
}

void write_trajectory_csv(const SystemDef& sys, const Trajectory& trajectory,
                          std::ostream& out) {
  out << "t";
  for (const auto& name : sys.space.coords) out << ", " << name;
  out << ", h";
  for (int i = 1; i <= sys.algebra_dim(); ++i) out << ", phi_" << i;
  out << ", phi_norm_sq\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    put(trajectory.times[i]);
    for (int c = 0; c < sys.dim(); ++c) {
      out << ", ";
      put(trajectory.states[i][c]);
    }
    out << ", ";
    put(trajectory.energy[i]);
    for (int c = 0; c < sys.algebra_dim(); ++c) {
      out << ", ";
      put(trajectory.moment[i][c]);
    }
    out << ", ";
    put(trajectory.moment_norm_sq[i]);
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Orbit sampling
// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXd wrap_state(const PhaseSpace& space, Eigen::VectorXd z) {
  for (int i = 0; i < space.dim(); ++i)
    if (space.periodic[static_cast<std::size_t>(i)]) {
      double x = std::fmod(z[i] + M_PI, 2.0 * M_PI);
      if (x < 0) x += 2.0 * M_PI;
      z[i] = x - M_PI;
    }
  return z;
}

double wrapped_sq_distance(const PhaseSpace& space, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& b) {
  double s = 0.0;
  for (int i = 0; i < space.dim(); ++i) {
    double d = a[i] - b[i];
    if (space.periodic[static_cast<std::size_t>(i)]) {
      d = std::abs(std::fmod(d, 2.0 * M_PI));
      d = std::min(d, 2.0 * M_PI - d);
    }
    s += d * d;
  }
  return s;
}

}  // namespace

OrbitSampler::OrbitSampler(const SystemDef& sys, Eigen::VectorXd m,
                           const Subspace& isotropy_subalgebra, int budget)
    : sys_(&sys), m_(std::move(m)), r_(isotropy_subalgebra.rank()) {
  const int dim = sys.dim();
  for (int a = 0; a < r_; ++a) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < sys.algebra_dim(); ++i) {
      double w = isotropy_subalgebra.basis(i, a);
      if (w == 0.0) continue;
      A += w * sys.generators[static_cast<std::size_t>(i)].A;
      b += w * sys.generators[static_cast<std::size_t>(i)].b;
    }
    basis_A_.push_back(std::move(A));
    basis_b_.push_back(std::move(b));
  }

  // Parameter grid over [-pi, pi]^r; exp of a bounded ball covers compact
  // isotropy groups. Odd per-axis counts keep the identity on the grid.
  std::vector<Eigen::VectorXd> params;
  if (r_ == 0) {
    params.push_back(Eigen::VectorXd(0));
    cell_ = 0.0;
  } else if (r_ <= 3) {
    int per_axis = r_ == 1 ? std::min(budget, 4095) : (r_ == 2 ? 95 : 21);
    if (per_axis % 2 == 0) --per_axis;
    cell_ = 2.0 * M_PI / (per_axis - 1);
    std::vector<int> idx(static_cast<std::size_t>(r_), 0);
    for (;;) {
      Eigen::VectorXd t(r_);
      for (int a = 0; a < r_; ++a) t[a] = -M_PI + cell_ * idx[static_cast<std::size_t>(a)];
      params.push_back(t);
      int a = 0;
      while (a < r_ && ++idx[static_cast<std::size_t>(a)] == per_axis) {
        idx[static_cast<std::size_t>(a)] = 0;
        ++a;
      }
      if (a == r_) break;
    }
  } else {
    // Budget would explode; sample each one-parameter subgroup separately.
    fallback_ = true;
    int per_axis = std::max(33, budget / r_);
    if (per_axis % 2 == 0) --per_axis;
    cell_ = 2.0 * M_PI / (per_axis - 1);
    params.push_back(Eigen::VectorXd::Zero(r_));
    for (int a = 0; a < r_; ++a)
      for (int i = 0; i < per_axis; ++i) {
        Eigen::VectorXd t = Eigen::VectorXd::Zero(r_);
        t[a] = -M_PI + cell_ * i;
        if (t[a] != 0.0) params.push_back(t);
      }
  }

  cloud_.resize(dim, static_cast<Eigen::Index>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i)
    cloud_.col(static_cast<Eigen::Index>(i)) = wrap_state(sys.space, orbit_point(params[i]));
  params_ = std::move(params);
}

Eigen::VectorXd OrbitSampler::orbit_point(const Eigen::VectorXd& t) const {
  if (r_ == 0) return m_;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(sys_->dim(), sys_->dim());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(sys_->dim());
  for (int a = 0; a < r_; ++a) {
    if (t[a] == 0.0) continue;
    A += t[a] * basis_A_[static_cast<std::size_t>(a)];
    b += t[a] * basis_b_[static_cast<std::size_t>(a)];
  }
  auto [E, v] = affine_flow(A, b, 1.0);
  return E * m_ + v;
}

double OrbitSampler::squared_distance_to(const Eigen::VectorXd& z,
                                         const Eigen::VectorXd& t) const {
  return wrapped_sq_distance(sys_->space, z, orbit_point(t));
}

double OrbitSampler::distance(const Eigen::VectorXd& z, double refine_below) const {
  Eigen::VectorXd zw = wrap_state(sys_->space, z);
  double best = std::numeric_limits<double>::infinity();
  Eigen::Index best_i = 0;
  for (Eigen::Index i = 0; i < cloud_.cols(); ++i) {
    double d2 = wrapped_sq_distance(sys_->space, zw, cloud_.col(i));
    if (d2 < best) {
      best = d2;
      best_i = i;
    }
  }
  double coarse = std::sqrt(best);
  if (r_ == 0 || coarse >= refine_below) return coarse;

  // Shrinking coordinate-parabola refinement around the best grid point.
  // Coupled parameters (r > 1) converge per coordinate sweep, so they get
  // more rounds with a gentler shrink.
  Eigen::VectorXd t = params_[static_cast<std::size_t>(best_i)];
  double d0 = best;
  double h = cell_;
  const int rounds = r_ == 1 ? 6 : 14;
  const double shrink = r_ == 1 ? 0.25 : 0.5;
  for (int round = 0; round < rounds && h > 1e-9; ++round) {
    for (int a = 0; a < r_; ++a) {
      Eigen::VectorXd tm = t, tp = t;
      tm[a] -= h;
      tp[a] += h;
      double dm = squared_distance_to(zw, tm);
      double dp = squared_distance_to(zw, tp);
      double denom = dm - 2.0 * d0 + dp;
      double shift;
      if (denom > 0.0) {
        shift = 0.5 * h * (dm - dp) / denom;
        shift = std::clamp(shift, -h, h);
      } else {
        shift = dm < dp ? -h : h;
      }
      if (shift != 0.0) {
        Eigen::VectorXd tn = t;
        tn[a] += shift;
        double dn = squared_distance_to(zw, tn);
        if (dn < d0) {
          t = tn;
          d0 = dn;
        } else if (dm < d0) {
          t = tm;
          d0 = dm;
        } else if (dp < d0) {
          t = tp;
          d0 = dp;
        }
      }
    }
    h *= shrink;
  }
  return std::sqrt(std::min(d0, best));
}

// ---------------------------------------------------------------------------
// Stability probe
// ---------------------------------------------------------------------------

namespace {

int resolve_thread_count(int requested, int jobs) {
  int threads = requested;
  if (threads <= 0) {
    if (const char* env = std::getenv("SYMSTAB_THREADS")) threads = std::atoi(env);
  }
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 0) threads = 1;
  return std::max(1, std::min(threads, jobs));
}

struct FitResult {
  bool valid = false;
  double slope = 0.0;
  double r_squared = 0.0;
};

// OLS of log(distance) against t over the tail half of the observation
// window, where the growing mode dominates.
FitResult fit_growth(const std::vector<double>& times, const std::vector<double>& dists,
                     double t_end) {
  FitResult fit;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.5 * t_end || dists[i] <= 0.0) continue;
    xs.push_back(times[i]);
    ys.push_back(std::log(dists[i]));
  }
  if (xs.size() < 5) return fit;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  double vx = sxx - sx * sx / n;
  double vy = syy - sy * sy / n;
  double cxy = sxy - sx * sy / n;
  if (vx <= 0.0) return fit;
  fit.slope = cxy / vx;
  fit.r_squared = vy > 0.0 ? (cxy * cxy) / (vx * vy) : 1.0;
  fit.valid = true;
  return fit;
}

}  // namespace

ProbeResult stability_probe(const SystemDef& sys, const RelEquilibrium& re,
                            const std::vector<double>& radii, const ProbeOptions& options) {
  ProbeResult result;
  result.radii = radii;
  result.horizon = options.horizon;
  result.dt = options.dt;
  result.seed = options.seed;
  if (radii.empty()) return result;

  double max_radius = 0.0;
  for (double r : radii) {
    if (!(r > 0.0)) throw std::invalid_argument("probe radii must be positive");
    max_radius = std::max(max_radius, r);
  }
  result.escape_radius =
      options.escape_radius > 0.0 ? options.escape_radius : 100.0 * max_radius;

  const int dim = sys.dim();
  Eigen::VectorXd offset = options.offset.size() ? options.offset : Eigen::VectorXd::Zero(dim);
  if (offset.size() != dim) throw std::invalid_argument("probe offset has wrong dimension");
  std::vector<int> mask = options.perturb_coords;
  if (mask.empty())
    for (int i = 0; i < dim; ++i) mask.push_back(i);
  for (int c : mask)
    if (c < 0 || c >= dim) throw std::invalid_argument("perturb coordinate out of range");

  Subspace h_alg = coadjoint_isotropy(sys.algebra, re.mu);
  OrbitSampler orbit(sys, re.point, h_alg, options.orbit_budget);
  result.orbit_parameter_dim = orbit.parameter_dim();
  result.orbit_points = orbit.grid_points();
  result.orbit_resolution = orbit.resolution();
  result.orbit_fallback = orbit.fallback();

  const long steps = std::lround(options.horizon / options.dt);
  int record_stride = options.record_stride;
  if (record_stride <= 0) record_stride = static_cast<int>(std::max(1L, steps / 4000));
  int distance_stride = options.distance_stride;
  if (distance_stride <= 0)
    distance_stride = std::max(1, static_cast<int>(steps / record_stride / 1000));

  const int per_radius = options.samples_per_radius;
  const int total = static_cast<int>(radii.size()) * per_radius;
  result.samples.resize(static_cast<std::size_t>(total));

  auto run_sample = [&](int job) {
    const int radius_index = job / per_radius;
    const int sample_index = job % per_radius;
    const double radius = radii[static_cast<std::size_t>(radius_index)];

    ProbeSample sample;
    sample.radius_index = radius_index;
    sample.sample_index = sample_index;
    sample.radius = radius;

    std::mt19937_64 rng(splitmix64(
        splitmix64(options.seed) ^
        (static_cast<std::uint64_t>(radius_index) << 32 | static_cast<std::uint64_t>(sample_index))));
    Eigen::VectorXd z = re.point + offset;
    Eigen::VectorXd v = sphere_sample(static_cast<int>(mask.size()), radius, rng);
    for (std::size_t i = 0; i < mask.size(); ++i) z[mask[i]] += v[static_cast<Eigen::Index>(i)];

    MidpointStepper stepper(sys);
    std::vector<double> dist_times, dists;
    Trajectory traj;
    traj.dt = options.dt;
    traj.horizon = options.horizon;
    traj.stride = record_stride;
    traj.max_moment_drift = Eigen::VectorXd::Zero(sys.algebra_dim());

    auto record = [&](double t, const Eigen::VectorXd& state) {
      traj.times.push_back(t);
      traj.states.push_back(state);
      traj.energy.push_back(sys.hamiltonian->value(state));
      Eigen::VectorXd mu = moment_map(sys, state);
      traj.moment.push_back(mu);
      traj.moment_norm_sq.push_back(sys.algebra.dual_norm_sq(mu));
    };

    long record_count = 0;
    auto measure = [&](double t, const Eigen::VectorXd& state) -> bool {
      if (options.keep_trajectories) record(t, state);
      if (record_count % distance_stride == 0) {
        double d = orbit.distance(state, options.refine_below);
        dist_times.push_back(t);
        dists.push_back(d);
        sample.max_orbit_distance = std::max(sample.max_orbit_distance, d);
        if (d > result.escape_radius) {
          sample.escaped = true;
          sample.escape_time = t;
          return true;
        }
      }
      ++record_count;
      return false;
    };

    bool stopped = measure(0.0, z);
    for (long k = 1; k <= steps && !stopped; ++k) {
      z = stepper.step(z, options.dt);
      if (k % record_stride == 0 || k == steps)
        stopped = measure(static_cast<double>(k) * options.dt, z);
    }

    if (sample.escaped) {
      FitResult fit = fit_growth(dist_times, dists, sample.escape_time);
      sample.fit_valid = fit.valid;
      sample.growth_rate = fit.slope;
      sample.fit_r_squared = fit.r_squared;
    }
    if (options.keep_trajectories) sample.trajectory = std::move(traj);
    result.samples[static_cast<std::size_t>(job)] = std::move(sample);
  };

  const int threads = resolve_thread_count(options.threads, total);
  if (threads <= 1) {
    for (int job = 0; job < total; ++job) run_sample(job);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int job = next.fetch_add(1); job < total; job = next.fetch_add(1)) run_sample(job);
      });
    for (auto& th : pool) th.join();
  }

  result.max_distance_per_radius.assign(radii.size(), 0.0);
  int fits = 0;
  double slope_sum = 0.0, r2_sum = 0.0;
  for (const auto& s : result.samples) {
    auto ri = static_cast<std::size_t>(s.radius_index);
    result.max_distance_per_radius[ri] =
        std::max(result.max_distance_per_radius[ri], s.max_orbit_distance);
    if (s.escaped) ++result.escaped_count;
    if (s.escaped && s.fit_valid) {
      ++fits;
      slope_sum += s.growth_rate;
      r2_sum += s.fit_r_squared;
    }
  }
  result.verdict = result.escaped_count > 0 ? ProbeVerdict::EscapeObserved
                                            : ProbeVerdict::NoEscapeObserved;
  if (result.escaped_count >= 10 && fits >= 10) {
    result.growth_rate_valid = true;
    result.growth_rate = slope_sum / fits;
    result.growth_r_squared = r2_sum / fits;
  }
  return result;
}

}  // namespace symstab
