#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "projphase/projection.hpp"
#include "projphase/tolerances.hpp"

namespace projphase {

// Point evaluation of the spanning criterion: defect is the smallest
// singular value of [P_1 x | ... | P_N x] at the normalized x.
struct SpanningDefect {
  Eigen::VectorXd x;
  double defect = 0;
};

// Pair of unit vectors with y orthogonal to every P_i x. Certifies that the
// magnitude map is not injective when the residual vanishes.
struct Witness {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double residual = 0;
};

enum class VerdictStatus { CertifiedInjective, WitnessFound, Inconclusive };

const char* to_string(VerdictStatus status);

// Knobs for the alternating witness search.
struct SearchBudget {
  int restarts = 50;
  int max_alternations = 200;
  std::uint64_t seed = 0;
};

// Knobs for the global defect minimization.
struct DefectSearchBudget {
  int grid_points = 4096;
  int refine_top = 8;
  int max_alternations = 200;
  std::uint64_t seed = 0;
};

struct CertifyOptions {
  // Grid mesh; NaN picks 1e-2 for M <= 3 and 5e-2 for M = 4. Grids above
  // dimension 4 are not offered.
  double mesh = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t node_cap = 10'000'000;
  SearchBudget witness_budget{};
  double tol_cert = kDefaultTolerances.certify;
  double tol_witness = kDefaultTolerances.witness;
};

struct BudgetReport {
  std::uint64_t grid_nodes = 0;
  double mesh = 0;
  int restarts = 0;
  long long alternations = 0;
};

struct InjectivityVerdict {
  VerdictStatus status = VerdictStatus::Inconclusive;
  double min_defect_found = 0;
  std::optional<Witness> witness;
  BudgetReport budget;
  double tol_cert = kDefaultTolerances.certify;
  double tol_witness = kDefaultTolerances.witness;
};

// Vectors with identical measurements, built from a witness as u = x + y,
// v = x - y.
struct CollisionPair {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  double max_measurement_gap = 0;
};

struct ComplementPropertyResult {
  bool holds = false;
  // 1-based indices of one side of a violating partition; empty when holds.
  std::vector<int> failing_partition;
};

// One run of the alternating eigen-descent on g(x, y) = sum_i (y^t P_i x)^2.
struct AlternatingResult {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double residual = 0;
  int alternations = 0;
  // Objective value after each half-step when tracing is requested.
  std::vector<double> objective_trace;
};

// (x^t P_1 x, ..., x^t P_N x). Entries equal ||P_i x||^2 for valid
// projections; the quadratic form makes sign symmetry exact in floating
// point.
Eigen::VectorXd measurement_map(const ProjectionCollection& collection,
                                const Eigen::VectorXd& x);

// G(x) = sum_i (P_i x)(P_i x)^t, symmetric PSD.
Eigen::MatrixXd image_gram(const ProjectionCollection& collection,
                           const Eigen::VectorXd& x);

// Throws ZeroVector when ||x|| = 0; x is normalized internally. Uses an SVD
// of the stacked image matrix so near-zero defects keep absolute accuracy.
SpanningDefect spanning_defect(const ProjectionCollection& collection,
                               const Eigen::VectorXd& x);

AlternatingResult alternating_descent(const ProjectionCollection& collection,
                                      const Eigen::VectorXd& x0,
                                      int max_alternations,
                                      bool record_trace = false);

// Multi-start alternating search. Returns a witness only when the best
// residual is at or below tol_witness. Restarts run in parallel on
// lane-keyed substreams and merge by (residual, restart index), so results
// do not depend on thread scheduling.
std::optional<Witness> find_witness(
    const ProjectionCollection& collection, const SearchBudget& budget = {},
    double tol_witness = kDefaultTolerances.witness);

// Lowest spanning defect found over a coarse grid plus alternating descent
// refinement seeded from the best grid nodes. Deterministic given budget.
std::pair<Eigen::VectorXd, double> min_defect_search(
    const ProjectionCollection& collection, const DefectSearchBudget& budget = {});

// Grid certification (M <= 4) combined with witness search. Certifies when
// every grid value clears tol_cert + sqrt(N) * mesh; the defect is
// sqrt(N)-Lipschitz since each P_i x is 1-Lipschitz. Throws BudgetExceeded
// when an explicitly requested mesh needs more than node_cap nodes.
InjectivityVerdict certify_injective(const ProjectionCollection& collection,
                                     const CertifyOptions& options = {});

// Exhaustive partition check for rank-one collections: every split of the
// index set must leave one side spanning. 2^(N-1) subsets, capped.
ComplementPropertyResult complement_property(
    const ProjectionCollection& lines,
    std::uint64_t max_partitions = std::uint64_t{1} << 20,
    double rank_scale = kDefaultTolerances.rank_scale);

// u = x + y, v = x - y. The measurement gap is 4|y^t P_i x| per index, so
// it inherits the witness residual scale.
CollisionPair collision_from_witness(const ProjectionCollection& collection,
                                     const Witness& witness);

}  // namespace projphase
