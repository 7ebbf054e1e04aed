#include "projphase/projection.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace projphase {

std::vector<int> ProjectionCollection::rank_profile() const {
  std::vector<int> ranks;
  ranks.reserve(projections.size());
  for (const auto& p : projections) ranks.push_back(p.rank);
  return ranks;
}

const char* to_string(ProjectionInvariant invariant) {
  switch (invariant) {
    case ProjectionInvariant::Symmetry:
      return "symmetry";
    case ProjectionInvariant::Idempotency:
      return "idempotency";
    case ProjectionInvariant::Trace:
      return "trace";
    case ProjectionInvariant::Eigenvalues:
      return "eigenvalues";
  }
  return "unknown";
}

std::vector<ProjectionInvariant> validate(const Projection& p,
                                          double tol_struct) {
  const Eigen::MatrixXd& m = p.matrix;
  if (m.rows() != m.cols())
    throw InvalidInput("validate: matrix must be square");
  if (m.rows() == 0) throw InvalidInput("validate: matrix must be nonempty");

  std::vector<ProjectionInvariant> violated;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol_struct)
    violated.push_back(ProjectionInvariant::Symmetry);
  if ((m * m - m).cwiseAbs().maxCoeff() > tol_struct)
    violated.push_back(ProjectionInvariant::Idempotency);
  if (std::abs(m.trace() - static_cast<double>(p.rank)) > tol_struct)
    violated.push_back(ProjectionInvariant::Trace);

  // General (possibly nonsymmetric) eigenvalues; a nonsymmetric idempotent
  // still has spectrum {0, 1} and must not trip this check.
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  bool eigen_ok = es.info() == Eigen::Success;
  if (eigen_ok) {
    for (int i = 0; i < m.rows(); ++i) {
      const std::complex<double> lambda = es.eigenvalues()[i];
      const double to_zero = std::abs(lambda);
      const double to_one = std::abs(lambda - std::complex<double>(1.0, 0.0));
      if (std::min(to_zero, to_one) > tol_struct) {
        eigen_ok = false;
        break;
      }
    }
  }
  if (!eigen_ok) violated.push_back(ProjectionInvariant::Eigenvalues);
  return violated;
}

void require_valid(const Projection& p, double tol_struct,
                   const std::string& label) {
  const auto violated = validate(p, tol_struct);
  if (violated.empty()) return;
  std::ostringstream msg;
  msg << label << " violates";
  for (const auto inv : violated) msg << ' ' << to_string(inv);
  throw InvariantError(msg.str());
}

namespace {

// Orthonormal column basis of span(input) via thin SVD; throws when the
// numerical rank at rank_scale falls below the column count.
Eigen::MatrixXd orthonormalized(const Eigen::MatrixXd& input,
                                double rank_scale) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(input, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  const double cutoff = rank_scale * sigma[0];
  int rank = 0;
  for (int i = 0; i < sigma.size(); ++i)
    if (sigma[i] > cutoff) ++rank;
  if (rank < input.cols())
    throw RankDeficientBasis("basis columns are linearly dependent");
  return svd.matrixU().leftCols(input.cols());
}

Projection projection_onto_columns(const Eigen::MatrixXd& q) {
  Projection p;
  p.matrix = q * q.transpose();
  // Exact symmetry regardless of accumulation order.
  p.matrix = 0.5 * (p.matrix + p.matrix.transpose()).eval();
  p.rank = static_cast<int>(q.cols());
  return p;
}

}  // namespace

Projection projection_from_basis(const Eigen::MatrixXd& basis,
                                 double rank_scale) {
  const int m = static_cast<int>(basis.rows());
  const int k = static_cast<int>(basis.cols());
  if (m < 2) throw InvalidInput("ambient dimension must be at least 2");
  if (k < 1 || k > m - 1)
    throw InvalidRank("subspace dimension must lie in [1, M-1]");
  return projection_onto_columns(orthonormalized(basis, rank_scale));
}

Subspace subspace_from_spanning(const Eigen::MatrixXd& spanning,
                                double rank_scale) {
  const int m = static_cast<int>(spanning.rows());
  const int k = static_cast<int>(spanning.cols());
  if (m < 2) throw InvalidInput("ambient dimension must be at least 2");
  if (k < 1 || k > m - 1)
    throw InvalidRank("subspace dimension must lie in [1, M-1]");
  return Subspace{orthonormalized(spanning, rank_scale)};
}

Subspace image_basis(const Projection& p) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.matrix);
  if (es.info() != Eigen::Success)
    throw InvariantError("eigendecomposition of projection failed");
  // Eigenvalues ascend, so the image vectors sit in the trailing columns.
  return Subspace{es.eigenvectors().rightCols(p.rank)};
}

Projection sample_grassmannian(int ambient_dim, int rank, RngStream& rng) {
  if (ambient_dim < 2) throw InvalidInput("ambient dimension must be at least 2");
  if (rank < 1 || rank > ambient_dim - 1)
    throw InvalidRank("rank must lie in [1, M-1]");
  constexpr int kMaxAttempts = 16;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Eigen::MatrixXd g = rng.gaussian_matrix(ambient_dim, rank);
    try {
      return projection_onto_columns(
          orthonormalized(g, kDefaultTolerances.rank_scale));
    } catch (const RankDeficientBasis&) {
      // Measure-zero event; redraw.
    }
  }
  throw DegenerateSample("Gaussian draws stayed rank deficient");
}

Projection complement(const Projection& p) {
  Projection c;
  c.matrix = Eigen::MatrixXd::Identity(p.dim(), p.dim()) - p.matrix;
  c.rank = p.dim() - p.rank;
  return c;
}

ProjectionCollection sample_collection(int ambient_dim,
                                       const std::vector<int>& ranks,
                                       std::uint64_t seed,
                                       const std::string& note) {
  if (ranks.empty()) throw InvalidInput("rank profile must be nonempty");
  ProjectionCollection collection;
  collection.ambient_dim = ambient_dim;
  collection.projections.reserve(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    RngStream stream(seed, i);
    collection.projections.push_back(
        sample_grassmannian(ambient_dim, ranks[i], stream));
  }
  collection.provenance = Provenance{seed, "grassmannian-gaussian", note};
  return collection;
}

Eigen::MatrixXd frame_vectors(const ProjectionCollection& collection) {
  int total = 0;
  for (const auto& p : collection.projections) total += p.rank;
  Eigen::MatrixXd frame(collection.ambient_dim, total);
  int col = 0;
  for (const auto& p : collection.projections) {
    frame.middleCols(col, p.rank) = image_basis(p).basis;
    col += p.rank;
  }
  return frame;
}

Eigen::VectorXd sign_canonicalize(const Eigen::VectorXd& v, double tol) {
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > tol) return v[i] > 0 ? v : Eigen::VectorXd(-v);
  }
  return v;
}

}  // namespace projphase
