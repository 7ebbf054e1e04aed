#include "projphase/sphere_grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace projphase {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
// Fractional part of the golden ratio; the azimuth increment that keeps the
// spiral quasi-uniform.
constexpr double kGoldenFrac = 0.61803398874989484820;

std::uint64_t fibonacci_count(double mesh) {
  const double n = std::ceil(16.0 / (mesh * mesh));
  return std::max<std::uint64_t>(32, static_cast<std::uint64_t>(n));
}

Eigen::VectorXd fibonacci_point(std::uint64_t i, std::uint64_t n) {
  const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi =
      2.0 * kPi * std::fmod(static_cast<double>(i) * kGoldenFrac, 1.0);
  Eigen::VectorXd p(3);
  p << r * std::cos(phi), r * std::sin(phi), z;
  return p;
}

}  // namespace

CoveringGrid CoveringGrid::build(int dim, double mesh,
                                 std::uint64_t node_cap) {
  if (mesh <= 0) throw InvalidInput("grid mesh must be positive");
  if (dim < 2 || dim > 4)
    throw InvalidInput("covering grids are offered for dimensions 2..4");

  CoveringGrid grid;
  grid.dim_ = dim;
  grid.mesh_ = mesh;

  if (dim == 2) {
    // Angles (j + 1/2) pi / n on [0, pi); the defect is even, so covering
    // directions up to sign suffices. Half spacing <= mesh / 2.
    grid.size_ = static_cast<std::uint64_t>(std::ceil(kPi / mesh));
  } else if (dim == 3) {
    grid.size_ = fibonacci_count(mesh);
    grid.fib_count_ = grid.size_;
  } else {
    // Coordinate-arc path bound: alpha step plus two scaled angle steps,
    // each at most h/2, so covering radius <= 3h/2 = mesh.
    const double h = mesh * (2.0 / 3.0);
    const auto n_alpha = static_cast<std::uint64_t>(std::ceil(kPi / h));
    std::uint64_t offset = 0;
    for (std::uint64_t i = 0; i < n_alpha; ++i) {
      const double alpha =
          (static_cast<double>(i) + 0.5) * kPi / static_cast<double>(n_alpha);
      const double sin_a = std::sin(alpha);
      const auto n_beta = std::max<std::uint64_t>(
          1, static_cast<std::uint64_t>(std::ceil(kPi * sin_a / h)));
      for (std::uint64_t j = 0; j < n_beta; ++j) {
        const double beta =
            (static_cast<double>(j) + 0.5) * kPi / static_cast<double>(n_beta);
        const double sin_b = std::sin(beta);
        const auto n_gamma = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(
                   std::ceil(2.0 * kPi * sin_a * sin_b / h)));
        grid.rings_.push_back(Ring{std::cos(alpha), sin_a, std::cos(beta),
                                   sin_b, n_gamma, offset});
        offset += n_gamma;
        if (offset > node_cap) {
          std::ostringstream msg;
          msg << "covering grid for dim 4 at mesh " << mesh
              << " exceeds the node cap of " << node_cap;
          throw BudgetExceeded(msg.str());
        }
      }
    }
    grid.size_ = offset;
  }

  if (grid.size_ > node_cap) {
    std::ostringstream msg;
    msg << "covering grid for dim " << dim << " at mesh " << mesh
        << " needs " << grid.size_ << " nodes, cap is " << node_cap;
    throw BudgetExceeded(msg.str());
  }
  return grid;
}

std::uint64_t CoveringGrid::node_count(int dim, double mesh) {
  if (mesh <= 0) throw InvalidInput("grid mesh must be positive");
  if (dim == 2) return static_cast<std::uint64_t>(std::ceil(kPi / mesh));
  if (dim == 3) return fibonacci_count(mesh);
  if (dim == 4) {
    const double h = mesh * (2.0 / 3.0);
    const auto n_alpha = static_cast<std::uint64_t>(std::ceil(kPi / h));
    std::uint64_t total = 0;
    for (std::uint64_t i = 0; i < n_alpha; ++i) {
      const double alpha =
          (static_cast<double>(i) + 0.5) * kPi / static_cast<double>(n_alpha);
      const double sin_a = std::sin(alpha);
      const auto n_beta = std::max<std::uint64_t>(
          1, static_cast<std::uint64_t>(std::ceil(kPi * sin_a / h)));
      for (std::uint64_t j = 0; j < n_beta; ++j) {
        const double beta =
            (static_cast<double>(j) + 0.5) * kPi / static_cast<double>(n_beta);
        total += std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(
                   std::ceil(2.0 * kPi * sin_a * std::sin(beta) / h)));
      }
    }
    return total;
  }
  throw InvalidInput("covering grids are offered for dimensions 2..4");
}

Eigen::VectorXd CoveringGrid::point(std::uint64_t index) const {
  if (dim_ == 2) {
    const double theta =
        (static_cast<double>(index) + 0.5) * kPi / static_cast<double>(size_);
    Eigen::VectorXd p(2);
    p << std::cos(theta), std::sin(theta);
    return p;
  }
  if (dim_ == 3) return fibonacci_point(index, fib_count_);

  // Locate the ring owning this index, then the azimuth within it.
  auto it = std::upper_bound(
      rings_.begin(), rings_.end(), index,
      [](std::uint64_t idx, const Ring& ring) { return idx < ring.offset; });
  const Ring& ring = *(it - 1);
  const std::uint64_t k = index - ring.offset;
  const double gamma = (static_cast<double>(k) + 0.5) * 2.0 * kPi /
                       static_cast<double>(ring.count);
  Eigen::VectorXd p(4);
  p << ring.cos_alpha, ring.sin_alpha * ring.cos_beta,
      ring.sin_alpha * ring.sin_beta * std::cos(gamma),
      ring.sin_alpha * ring.sin_beta * std::sin(gamma);
  return p;
}

std::vector<Eigen::VectorXd> coarse_sphere_grid(int dim, int target_points,
                                                std::uint64_t seed) {
  if (target_points < 1) throw InvalidInput("grid size must be positive");
  std::vector<Eigen::VectorXd> points;
  if (dim == 2) {
    points.reserve(target_points);
    for (int j = 0; j < target_points; ++j) {
      const double theta =
          (j + 0.5) * kPi / static_cast<double>(target_points);
      Eigen::VectorXd p(2);
      p << std::cos(theta), std::sin(theta);
      points.push_back(p);
    }
  } else if (dim == 3) {
    points.reserve(target_points);
    for (int i = 0; i < target_points; ++i)
      points.push_back(fibonacci_point(i, target_points));
  } else if (dim == 4) {
    // Mesh chosen so the ring construction lands near the target count.
    const double predicted_h =
        std::cbrt(2.0 * kPi * kPi / static_cast<double>(target_points));
    const auto grid = CoveringGrid::build(
        4, predicted_h * 1.5, std::max<std::uint64_t>(64, 8ull * target_points));
    points.reserve(grid.size());
    for (std::uint64_t i = 0; i < grid.size(); ++i)
      points.push_back(grid.point(i));
  } else {
    RngStream stream(seed, 0xC0A25Eull);
    points.reserve(target_points);
    for (int i = 0; i < target_points; ++i)
      points.push_back(stream.unit_vector(dim));
  }
  return points;
}

}  // namespace projphase
