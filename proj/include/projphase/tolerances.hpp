#pragma once

namespace projphase {

// Numerical thresholds used across the library. Each knob is overridable per
// call; these are the defaults the CLI and the tests rely on.
struct Tolerances {
  // Structural checks on projection matrices: symmetry, idempotency, trace.
  double structural = 1e-8;
  // Rank decisions: a singular value counts as nonzero when it exceeds
  // rank_scale times the largest singular value of the same matrix.
  double rank_scale = 1e-10;
  // A witness pair is accepted when max_i |y^T P_i x| falls below this.
  double witness = 1e-8;
  // Grid certification margin on the spanning defect.
  double certify = 1e-4;
  // Maximum measurement gap tolerated for a collision pair built from a
  // witness at the default witness tolerance.
  double collision = 1e-7;
  // Relative residual below which a reconstruction counts as converged.
  double reconstruction = 1e-10;
};

inline constexpr Tolerances kDefaultTolerances{};

}  // namespace projphase
