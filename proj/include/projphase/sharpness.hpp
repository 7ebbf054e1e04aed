#pragma once

#include "projphase/injectivity.hpp"
#include "projphase/projection.hpp"

namespace projphase {

// What the dimension counts say about (M, N) before looking at any concrete
// collection. generic_sufficient and obstruction_applies never hold
// together since 2M-1 > 2M-2.
struct BoundReport {
  int ambient_dim = 0;
  int num_projections = 0;
  // N >= 2M-1: generic collections admit phase retrieval.
  bool generic_sufficient = false;
  // M-1 a power of two and N <= 2M-2: no collection of N projections in
  // R^M admits phase retrieval.
  bool obstruction_applies = false;
  // v2 of the central-ish binomial C(2M-2, M-1); the obstruction regime is
  // exactly where this valuation is 1.
  int central_binomial_2adic = 0;
};

// v2(C(2n, n)). Equals the binary digit sum of n: with v2(m!) = m - s2(m),
// the valuation telescopes to 2 s2(n) - s2(2n) = s2(n).
int central_binomial_2adic(long long n);

BoundReport obstruction_predicate(int ambient_dim, int num_projections);

// Closed-form witness for 2M-2 rank-one projections: y is a unit kernel
// vector of the generators v_1..v_{M-1} stacked as rows, x likewise for
// v_M..v_{2M-2}. Then y^t P_i x factors through <y, v_i> or <x, v_i> and
// vanishes for every i.
Witness rank1_witness_by_linear_algebra(
    const ProjectionCollection& lines,
    double rank_scale = kDefaultTolerances.rank_scale);

}  // namespace projphase
