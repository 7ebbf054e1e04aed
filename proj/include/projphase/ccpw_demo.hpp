#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "projphase/injectivity.hpp"
#include "projphase/projection.hpp"

namespace projphase {

// Worked three-dimensional example contrasting a certifiable family of
// subspaces with its complements, which collide along the third basis
// direction of the first frame.
struct CcpwDemoOptions {
  std::uint64_t seed = 0;
  double mesh = 1e-2;
  double tol_cert = kDefaultTolerances.certify;
  double tol_witness = kDefaultTolerances.witness;
  // Smallest |det| over all 3-subsets of the six basis vectors required
  // before a draw counts as full spark. Guards certification margins, not
  // just nondegeneracy.
  double spark_threshold = 0.15;
  int max_spark_attempts = 500;
  SearchBudget witness_budget{};
};

struct CcpwDemoReport {
  // Columns are the two orthonormal bases.
  Eigen::Matrix3d phi;
  Eigen::Matrix3d psi;
  double min_subset_det = 0;
  int spark_attempts = 0;
  ProjectionCollection family;
  ProjectionCollection complements;
  InjectivityVerdict family_verdict;
  InjectivityVerdict complement_verdict;
  // Euclidean distance from the complement witness x to the nearer of
  // +-phi_3; meaningful only when the witness exists.
  double witness_distance_to_phi3 = 0;
  CollisionPair collision;
};

// Draws rotated bases until full spark holds, builds the five subspaces
// W1 = <phi1, phi3>, W2 = <phi2, phi3>, W3 = <phi3>, W4 = <psi1>,
// W5 = <psi2>, and runs the injectivity checker on the family and on its
// complements. Deterministic given options.seed.
CcpwDemoReport run_ccpw_demo(const CcpwDemoOptions& options = {});

}  // namespace projphase
