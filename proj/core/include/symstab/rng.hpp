#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace symstab {

// Deterministic sampling helpers. std::mt19937_64 output is fully specified
// by the standard; the distributions below are written out by hand so
// sequences are identical across standard libraries.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Uniform in [0, 1).
inline double uniform_unit(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Uniform in [-1, 1).
inline double uniform_symmetric(std::mt19937_64& g) { return 2.0 * uniform_unit(g) - 1.0; }

/// Standard normal via Box-Muller (one value per call).
inline double standard_normal(std::mt19937_64& g) {
  double u1 = 1.0 - uniform_unit(g);  // (0, 1]
  double u2 = uniform_unit(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Uniform sample on the radius-r sphere in R^k (k >= 1).
inline Eigen::VectorXd sphere_sample(int k, double radius, std::mt19937_64& g) {
  Eigen::VectorXd v(k);
  double norm2 = 0.0;
  do {
    for (int i = 0; i < k; ++i) v[i] = standard_normal(g);
    norm2 = v.squaredNorm();
  } while (norm2 == 0.0);
  return v * (radius / std::sqrt(norm2));
}

}  // namespace symstab
