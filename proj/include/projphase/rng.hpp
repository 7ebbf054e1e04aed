#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>

namespace projphase {

// splitmix64 step. Advances `state` and returns a mixed output word.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic random stream keyed by a master seed plus up to three lane
// indices. Distinct keys give streams that are independent for all practical
// purposes, so parallel trials can draw without any coordination and results
// do not depend on scheduling order.
//
// Gaussians use an explicit Box-Muller transform instead of
// std::normal_distribution so the byte stream is identical across standard
// library implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t lane0 = 0,
                     std::uint64_t lane1 = 0, std::uint64_t lane2 = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s ^= lane0 + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= lane1 + 0xc2b2ae3d27d4eb4fULL;
    h ^= splitmix64(s);
    s ^= lane2 + 0x165667b19e3779f9ULL;
    h ^= splitmix64(s);
    engine_.seed(h);
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal. Draws two uniforms per call, discards the paired
  // variate; slot-stable, which keeps substreams reproducible.
  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  Eigen::VectorXd gaussian_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gaussian();
    return v;
  }

  // Row-major fill order so the draw sequence is independent of Eigen's
  // storage layout.
  Eigen::MatrixXd gaussian_matrix(int rows, int cols) {
    Eigen::MatrixXd a(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) a(i, j) = gaussian();
    return a;
  }

  // Uniform on the unit sphere in R^n.
  Eigen::VectorXd unit_vector(int n) {
    for (;;) {
      Eigen::VectorXd v = gaussian_vector(n);
      const double norm = v.norm();
      if (norm > 1e-8) return v / norm;
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace projphase
