#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "projphase/projection.hpp"
#include "projphase/tolerances.hpp"

namespace projphase {

// Squared projection magnitudes b_i = ||P_i x||^2 for some unknown x.
struct MeasurementVector {
  Eigen::VectorXd values;
  std::string collection_ref;
};

// Validates length against the collection and clamps entries in
// [-tol_struct, 0) to zero; more negative entries are invalid.
MeasurementVector make_measurements(
    const Eigen::VectorXd& values, const ProjectionCollection& collection,
    const std::string& collection_ref = "",
    double tol_struct = kDefaultTolerances.structural);

struct ReconstructionBudget {
  int restarts = 20;
  int max_iterations = 2000;
  std::uint64_t seed = 0;
};

struct ReconstructionResult {
  // Sign-canonicalized; the residual is recomputed from x_hat, never taken
  // from the optimizer state.
  Eigen::VectorXd x_hat;
  double residual = 0;
  int restarts_used = 0;
  bool converged = false;
  int iterations = 0;
  // Distinct sign-canonicalized near-optimal solutions that differ from
  // x_hat by more than 1e-4. Nonempty only when the measurements are
  // genuinely ambiguous.
  std::vector<Eigen::VectorXd> alternatives;
};

// F(z) = sum_i (z^t P_i z - b_i)^2 and its exact gradient
// sum_i 4 (z^t P_i z - b_i) P_i z.
std::pair<double, Eigen::VectorXd> objective_and_gradient(
    const ProjectionCollection& collection, const MeasurementVector& b,
    const Eigen::VectorXd& z);

// Multi-start first-order descent with backtracking, finished by a damped
// Gauss-Newton polish on the residual system (Jacobian rows 2 (P_i z)^t).
// Every restart runs to completion; the best candidates across restarts
// feed the ambiguity diagnostics.
ReconstructionResult reconstruct(
    const ProjectionCollection& collection, const MeasurementVector& b,
    const ReconstructionBudget& budget = {},
    double tol_recon = kDefaultTolerances.reconstruction);

// min(||x_hat - x_true||, ||x_hat + x_true||).
double recovery_error(const Eigen::VectorXd& x_hat,
                      const Eigen::VectorXd& x_true);

}  // namespace projphase
