#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "projphase/errors.hpp"
#include "projphase/rng.hpp"

namespace projphase {

// Deterministic node set on the unit sphere of R^dim whose covering radius
// (Euclidean, after identifying antipodes where the construction exploits
// evenness) is at most `mesh`. Supported for dim in {2, 3, 4}:
//   dim 2: uniform angles on [0, pi), half spacing <= mesh/2.
//   dim 3: Fibonacci spiral with 16/mesh^2 nodes; the 16 gives a measured
//          covering radius under 0.6 * mesh (asserted by tests).
//   dim 4: product of polar angles with per-ring azimuth counts; the path
//          bound along coordinate arcs gives covering radius <= 3h/2 for
//          step h, so h = (2/3) * mesh.
// Nodes are index addressable so huge grids are never materialized.
class CoveringGrid {
 public:
  static CoveringGrid build(int dim, double mesh, std::uint64_t node_cap);

  // Node count the grid would have; no allocation beyond ring tables.
  static std::uint64_t node_count(int dim, double mesh);

  std::uint64_t size() const { return size_; }
  int dim() const { return dim_; }
  double mesh() const { return mesh_; }
  Eigen::VectorXd point(std::uint64_t index) const;

 private:
  CoveringGrid() = default;

  struct Ring {
    double cos_alpha, sin_alpha;
    double cos_beta, sin_beta;
    std::uint64_t count;
    std::uint64_t offset;
  };

  int dim_ = 0;
  double mesh_ = 0;
  std::uint64_t size_ = 0;
  std::uint64_t fib_count_ = 0;
  std::vector<Ring> rings_;
};

// Materialized quasi-uniform sample of roughly `target_points` unit vectors
// used to seed searches. Structured for dim <= 4, seeded random above.
std::vector<Eigen::VectorXd> coarse_sphere_grid(int dim, int target_points,
                                                std::uint64_t seed);

}  // namespace projphase
