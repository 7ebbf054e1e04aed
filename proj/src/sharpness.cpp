#include "projphase/sharpness.hpp"

#include <Eigen/Dense>
#include <bit>
#include <sstream>

namespace projphase {

int central_binomial_2adic(long long n) {
  if (n <= 0) throw InvalidInput("argument must be a positive integer");
  // v2(C(2n, n)) = v2((2n)!) - 2 v2(n!) = (2n - s2(2n)) - 2(n - s2(n))
  //              = 2 s2(n) - s2(2n) = s2(n).
  return std::popcount(static_cast<unsigned long long>(n));
}

BoundReport obstruction_predicate(int ambient_dim, int num_projections) {
  if (ambient_dim < 2) throw InvalidInput("ambient dimension must be at least 2");
  if (num_projections < 1)
    throw InvalidInput("number of projections must be at least 1");

  BoundReport report;
  report.ambient_dim = ambient_dim;
  report.num_projections = num_projections;
  report.generic_sufficient = num_projections >= 2 * ambient_dim - 1;

  const unsigned long long m1 = static_cast<unsigned long long>(ambient_dim) - 1;
  const bool power_of_two = (m1 & (m1 - 1)) == 0;
  report.obstruction_applies =
      power_of_two && num_projections <= 2 * ambient_dim - 2;
  report.central_binomial_2adic =
      central_binomial_2adic(static_cast<long long>(m1));
  return report;
}

Witness rank1_witness_by_linear_algebra(const ProjectionCollection& lines,
                                        double rank_scale) {
  const int m = lines.ambient_dim;
  const int n = lines.count();
  if (n != 2 * m - 2) {
    std::ostringstream msg;
    msg << "need exactly " << 2 * m - 2 << " projections for dimension " << m
        << ", got " << n;
    throw InvalidInput(msg.str());
  }
  for (const auto& p : lines.projections)
    if (p.rank != 1)
      throw NonRankOne("closed-form witness needs rank-one projections");

  // Unit generators v_i with P_i = v_i v_i^t.
  Eigen::MatrixXd generators(m, n);
  for (int i = 0; i < n; ++i) {
    const auto& mat = lines.projections[i].matrix;
    int best_col = 0;
    for (int j = 1; j < m; ++j)
      if (mat.col(j).norm() > mat.col(best_col).norm()) best_col = j;
    const double norm = mat.col(best_col).norm();
    if (!(norm > 0)) throw NonRankOne("projection matrix is zero");
    generators.col(i) = mat.col(best_col) / norm;
  }

  // y kills the first M-1 generators, x the remaining M-1. Each system is
  // (M-1) x M, so a kernel vector always exists; the guard only fires if
  // the SVD fails to expose it numerically.
  auto kernel_vector = [&](int first_col) {
    Eigen::MatrixXd rows(m - 1, m);
    for (int i = 0; i < m - 1; ++i)
      rows.row(i) = generators.col(first_col + i).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
    const Eigen::VectorXd candidate = svd.matrixV().col(m - 1);
    const double leak = (rows * candidate).cwiseAbs().maxCoeff();
    if (leak > std::max(1e-8, rank_scale))
      throw DegenerateSystem("null space not resolved numerically");
    return sign_canonicalize(candidate);
  };

  Witness witness;
  witness.y = kernel_vector(0);
  witness.x = kernel_vector(m - 1);
  double worst = 0;
  for (const auto& p : lines.projections)
    worst = std::max(worst, std::abs(witness.y.dot(p.matrix * witness.x)));
  witness.residual = worst;
  return witness;
}

}  // namespace projphase
