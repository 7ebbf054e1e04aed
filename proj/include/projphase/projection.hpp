#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "projphase/errors.hpp"
#include "projphase/rng.hpp"
#include "projphase/tolerances.hpp"

namespace projphase {

// Orthogonal projection matrix on R^M together with its intended rank.
// Construction helpers below always produce matrices that pass validate();
// the struct itself stays an aggregate so diagnostics can be exercised on
// broken inputs.
struct Projection {
  Eigen::MatrixXd matrix;
  int rank = 0;

  int dim() const { return static_cast<int>(matrix.rows()); }
};

// Linear subspace of R^M held as an orthonormal column basis.
struct Subspace {
  Eigen::MatrixXd basis;

  int ambient_dim() const { return static_cast<int>(basis.rows()); }
  int dim() const { return static_cast<int>(basis.cols()); }
};

struct Provenance {
  std::uint64_t seed = 0;
  std::string sampler;
  std::string note;
};

// A finite family of projections on a common ambient space.
struct ProjectionCollection {
  int ambient_dim = 0;
  std::vector<Projection> projections;
  std::optional<Provenance> provenance;

  int count() const { return static_cast<int>(projections.size()); }
  std::vector<int> rank_profile() const;
};

enum class ProjectionInvariant { Symmetry, Idempotency, Trace, Eigenvalues };

const char* to_string(ProjectionInvariant invariant);

// Structural invariants `p` violates at tolerance `tol_struct`, in
// declaration order of ProjectionInvariant. Empty means valid. Eigenvalues
// are checked on the matrix as given (not symmetrized), so a nonsymmetric
// idempotent reports only the symmetry violation.
std::vector<ProjectionInvariant> validate(
    const Projection& p, double tol_struct = kDefaultTolerances.structural);

// Throws InvariantError naming the first violated invariant.
void require_valid(const Projection& p,
                   double tol_struct = kDefaultTolerances.structural,
                   const std::string& label = "projection");

// Orthogonal projection onto the column span of `basis` (M x k, full column
// rank k >= 1). Columns need not be orthonormal. Throws RankDeficientBasis
// when the numerical rank at `rank_scale` falls short of k.
Projection projection_from_basis(
    const Eigen::MatrixXd& basis,
    double rank_scale = kDefaultTolerances.rank_scale);

// Subspace spanned by the columns of `spanning` (orthonormalized copy).
Subspace subspace_from_spanning(
    const Eigen::MatrixXd& spanning,
    double rank_scale = kDefaultTolerances.rank_scale);

// Orthonormal basis of the image of a valid projection, k = p.rank columns.
Subspace image_basis(const Projection& p);

// Haar-uniform rank-k projection on R^M, i.e. the projection onto the span
// of k Gaussian columns. Bitwise deterministic in the stream state.
Projection sample_grassmannian(int ambient_dim, int rank, RngStream& rng);

// I - P, the projection onto the orthogonal complement of the image.
Projection complement(const Projection& p);

// Samples a collection with the given rank profile; lane-keyed substreams
// make each member independent of the others' draw counts.
ProjectionCollection sample_collection(int ambient_dim,
                                       const std::vector<int>& ranks,
                                       std::uint64_t seed,
                                       const std::string& note = "");

// Concatenated orthonormal image bases of all members, as columns. Rank-one
// collections yield one generator vector per projection.
Eigen::MatrixXd frame_vectors(const ProjectionCollection& collection);

// Flips the sign so the first component larger than `tol` in absolute value
// is positive. Identifies x with -x wherever only |<P x, x>| matters.
Eigen::VectorXd sign_canonicalize(const Eigen::VectorXd& v, double tol = 1e-12);

}  // namespace projphase
