#include "projphase/reconstruction.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "projphase/parallel.hpp"
#include "projphase/rng.hpp"

namespace projphase {

namespace {

double objective_only(const ProjectionCollection& collection,
                      const Eigen::VectorXd& b, const Eigen::VectorXd& z) {
  double f = 0;
  for (int i = 0; i < collection.count(); ++i) {
    const double r = z.dot(collection.projections[i].matrix * z) - b[i];
    f += r * r;
  }
  return f;
}

struct SolveOutcome {
  Eigen::VectorXd z;
  double objective = 0;
  int iterations = 0;
};

// One descent run: Armijo gradient phase, then Levenberg-damped
// Gauss-Newton on the residual system. Iteration counts include rejected
// trial steps so the budget is honest about work done.
SolveOutcome solve_single(const ProjectionCollection& collection,
                          const Eigen::VectorXd& b, const Eigen::VectorXd& z0,
                          int max_iterations, const MeasurementVector& wrapped) {
  const int m = collection.ambient_dim;
  const int n = collection.count();
  SolveOutcome out;
  out.z = z0;

  const double b_norm = b.norm();
  const double floor = std::pow(1e-14 * (1.0 + b_norm), 2);

  auto eval = [&](const Eigen::VectorXd& z) {
    return objective_only(collection, b, z);
  };

  double f = eval(out.z);
  double step = 0.1 / (1.0 + b_norm);
  const int gradient_cap = std::min(400, max_iterations);
  int flat_rounds = 0;

  while (out.iterations < gradient_cap && f > floor) {
    auto [f_now, grad] = objective_and_gradient(collection, wrapped, out.z);
    f = f_now;
    const double grad_sq = grad.squaredNorm();
    if (grad_sq <= 1e-28 * (1.0 + f)) break;

    bool accepted = false;
    double t = step;
    for (int halvings = 0; halvings < 60 && out.iterations < gradient_cap;
         ++halvings) {
      ++out.iterations;
      const Eigen::VectorXd trial = out.z - t * grad;
      const double f_trial = eval(trial);
      if (f_trial <= f - 1e-4 * t * grad_sq) {
        // Flat accepted steps hand over to the second-order phase.
        if (f - f_trial <= 1e-12 * f) ++flat_rounds;
        else flat_rounds = 0;
        out.z = trial;
        f = f_trial;
        step = std::min(t * 1.5, 1e3);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted || flat_rounds >= 3) break;
  }

  // Gauss-Newton with Levenberg damping; quadratic tail convergence on
  // exact-data instances.
  double lambda = 1e-4;
  Eigen::VectorXd residuals(n);
  Eigen::MatrixXd jacobian(n, m);
  while (out.iterations < max_iterations) {
    if (f <= floor || lambda > 1e12) break;
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd image = collection.projections[i].matrix * out.z;
      residuals[i] = out.z.dot(image) - b[i];
      jacobian.row(i) = 2.0 * image.transpose();
    }
    Eigen::MatrixXd normal = jacobian.transpose() * jacobian;
    normal.diagonal().array() += lambda;
    const Eigen::VectorXd direction =
        normal.ldlt().solve(-jacobian.transpose() * residuals);

    ++out.iterations;
    const Eigen::VectorXd trial = out.z + direction;
    const double f_trial = eval(trial);
    if (f_trial < f) {
      out.z = trial;
      f = f_trial;
      lambda = std::max(lambda / 3.0, 1e-12);
      if (direction.norm() <= 1e-16 * (1.0 + out.z.norm())) break;
    } else {
      lambda *= 10.0;
    }
  }

  out.objective = f;
  return out;
}

}  // namespace

MeasurementVector make_measurements(const Eigen::VectorXd& values,
                                    const ProjectionCollection& collection,
                                    const std::string& collection_ref,
                                    double tol_struct) {
  if (values.size() != collection.count()) {
    std::ostringstream msg;
    msg << "measurement vector has " << values.size() << " entries, collection has "
        << collection.count() << " projections";
    throw DimensionMismatch(msg.str());
  }
  MeasurementVector b;
  b.values = values;
  b.collection_ref = collection_ref;
  for (int i = 0; i < b.values.size(); ++i) {
    if (b.values[i] < -tol_struct) {
      std::ostringstream msg;
      msg << "measurement " << i << " is negative beyond tolerance: "
          << b.values[i];
      throw InvalidInput(msg.str());
    }
    if (b.values[i] < 0) b.values[i] = 0;
  }
  return b;
}

std::pair<double, Eigen::VectorXd> objective_and_gradient(
    const ProjectionCollection& collection, const MeasurementVector& b,
    const Eigen::VectorXd& z) {
  if (z.size() != collection.ambient_dim)
    throw DimensionMismatch("point dimension does not match collection");
  if (b.values.size() != collection.count())
    throw DimensionMismatch("measurement count does not match collection");

  double f = 0;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(collection.ambient_dim);
  for (int i = 0; i < collection.count(); ++i) {
    const Eigen::VectorXd image = collection.projections[i].matrix * z;
    const double r = z.dot(image) - b.values[i];
    f += r * r;
    grad.noalias() += (4.0 * r) * image;
  }
  return {f, grad};
}

ReconstructionResult reconstruct(const ProjectionCollection& collection,
                                 const MeasurementVector& b,
                                 const ReconstructionBudget& budget,
                                 double tol_recon) {
  if (b.values.size() != collection.count())
    throw DimensionMismatch("measurement count does not match collection");
  const int m = collection.ambient_dim;
  const int restarts = std::max(1, budget.restarts);
  const double sum_b = b.values.sum();
  const double b_norm = b.values.norm();

  // Spectral seed: top eigenvector of sum_i b_i P_i scaled so the expected
  // measurement mass matches sum_b.
  Eigen::MatrixXd lift = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < collection.count(); ++i)
    lift += b.values[i] * collection.projections[i].matrix;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lift);
  Eigen::VectorXd spectral = sign_canonicalize(es.eigenvectors().col(m - 1));
  double mass = 0;
  for (const auto& p : collection.projections)
    mass += (p.matrix * spectral).squaredNorm();
  spectral *= (mass > 1e-12 && sum_b > 0) ? std::sqrt(sum_b / mass) : 0.0;

  int total_rank = 0;
  for (const auto& p : collection.projections) total_rank += p.rank;
  const double random_scale =
      std::sqrt(sum_b * static_cast<double>(m) /
                std::max(1.0, static_cast<double>(total_rank)));

  std::vector<SolveOutcome> outcomes(restarts);
  parallel_for(static_cast<std::size_t>(restarts), [&](std::size_t r) {
    Eigen::VectorXd z0;
    if (r == 0) {
      z0 = spectral;
    } else {
      RngStream stream(budget.seed, r);
      z0 = random_scale * stream.unit_vector(m);
    }
    outcomes[r] =
        solve_single(collection, b.values, z0, budget.max_iterations, b);
  });

  // Canonicalize, recompute residuals from the canonical points, then merge
  // by (residual, restart index).
  std::vector<Eigen::VectorXd> canonical(restarts);
  std::vector<double> residuals(restarts);
  for (int r = 0; r < restarts; ++r) {
    canonical[r] = sign_canonicalize(outcomes[r].z);
    residuals[r] =
        std::sqrt(objective_only(collection, b.values, canonical[r]));
  }
  int best = 0;
  for (int r = 1; r < restarts; ++r)
    if (residuals[r] < residuals[best]) best = r;

  ReconstructionResult result;
  result.x_hat = canonical[best];
  result.residual = residuals[best];
  result.restarts_used = restarts;
  result.iterations = outcomes[best].iterations;
  const double accept = tol_recon * (1.0 + b_norm);
  result.converged = result.residual <= accept;

  for (int r = 0; r < restarts; ++r) {
    if (r == best || residuals[r] > accept) continue;
    const Eigen::VectorXd& candidate = canonical[r];
    bool fresh = (candidate - result.x_hat).norm() > 1e-4;
    for (const auto& seen : result.alternatives)
      fresh = fresh && (candidate - seen).norm() > 1e-4;
    if (fresh) result.alternatives.push_back(candidate);
  }
  return result;
}

double recovery_error(const Eigen::VectorXd& x_hat,
                      const Eigen::VectorXd& x_true) {
  if (x_hat.size() != x_true.size())
    throw DimensionMismatch("recovery_error: dimensions differ");
  return std::min((x_hat - x_true).norm(), (x_hat + x_true).norm());
}

}  // namespace projphase
