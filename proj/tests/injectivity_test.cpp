#include "projphase/injectivity.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "projphase/errors.hpp"
#include "projphase/projection.hpp"
#include "projphase/rng.hpp"

namespace pp = projphase;

namespace {

pp::Projection line_at(double theta) {
  Eigen::MatrixXd basis(2, 1);
  basis << std::cos(theta), std::sin(theta);
  return pp::projection_from_basis(basis);
}

pp::ProjectionCollection lines_at(const std::vector<double>& angles) {
  pp::ProjectionCollection c;
  c.ambient_dim = 2;
  for (double theta : angles) c.projections.push_back(line_at(theta));
  return c;
}

// Independent defect evaluation through the Gram eigenvalue route rather
// than the stacked SVD the library uses.
double defect_oracle(const pp::ProjectionCollection& c, Eigen::VectorXd x) {
  x.normalize();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(c.ambient_dim, c.ambient_dim);
  for (const auto& p : c.projections) {
    Eigen::VectorXd image = p.matrix * x;
    gram += image * image.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  return std::sqrt(std::max(0.0, es.eigenvalues()[0]));
}

// Exhaustive partition check over rank-one generators with an unrelated
// rank test (full-pivot LU).
bool complement_property_oracle(const pp::ProjectionCollection& lines) {
  const int n = lines.count();
  const int m = lines.ambient_dim;
  Eigen::MatrixXd generators = pp::frame_vectors(lines);
  auto spans = [&](std::uint64_t mask) {
    Eigen::MatrixXd subset(m, n);
    int cols = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (std::uint64_t{1} << i)) subset.col(cols++) = generators.col(i);
    if (cols < m) return false;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(subset.leftCols(cols));
    lu.setThreshold(1e-10);
    return lu.rank() == m;
  };
  const std::uint64_t all = (std::uint64_t{1} << n) - 1;
  for (std::uint64_t mask = 0; mask <= all; ++mask)
    if (!spans(mask) && !spans(all & ~mask)) return false;
  return true;
}

TEST(MeasurementMap, CoordinateExample) {
  pp::ProjectionCollection c;
  c.ambient_dim = 2;
  c.projections.push_back(
      pp::Projection{Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix(), 1});
  Eigen::VectorXd x(2);
  x << 3, 4;
  auto b = pp::measurement_map(c, x);
  ASSERT_EQ(b.size(), 1);
  EXPECT_DOUBLE_EQ(b[0], 9.0);
}

TEST(MeasurementMap, SignSymmetryIsExact) {
  auto c = pp::sample_collection(4, {1, 2, 3, 2}, 17);
  pp::RngStream rng(18);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd x = rng.gaussian_vector(4);
    Eigen::VectorXd plus = pp::measurement_map(c, x);
    Eigen::VectorXd minus = pp::measurement_map(c, -x);
    EXPECT_TRUE((plus.array() == minus.array()).all());
  }
}

TEST(MeasurementMap, MatchesSquaredImageNorm) {
  auto c = pp::sample_collection(3, {1, 2}, 19);
  pp::RngStream rng(20);
  Eigen::VectorXd x = rng.gaussian_vector(3);
  auto b = pp::measurement_map(c, x);
  for (int i = 0; i < c.count(); ++i)
    EXPECT_NEAR(b[i], (c.projections[i].matrix * x).squaredNorm(), 1e-12);
}

TEST(ImageGram, PositiveSemidefinite) {
  auto c = pp::sample_collection(4, {2, 1, 3}, 23);
  pp::RngStream rng(24);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd gram = pp::image_gram(c, rng.gaussian_vector(4));
    EXPECT_LE((gram - gram.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    EXPECT_GE(es.eigenvalues()[0], -1e-12);
  }
}

TEST(SpanningDefect, AxisCollection) {
  pp::ProjectionCollection c;
  c.ambient_dim = 2;
  c.projections.push_back(
      pp::Projection{Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix(), 1});
  c.projections.push_back(
      pp::Projection{Eigen::Vector2d(0, 1).asDiagonal().toDenseMatrix(), 1});

  Eigen::VectorXd e1(2);
  e1 << 1, 0;
  EXPECT_LE(pp::spanning_defect(c, e1).defect, 1e-15);

  Eigen::VectorXd diag(2);
  diag << 1, 1;
  // G(x) = diag(1/2, 1/2) at the normalized diagonal direction.
  EXPECT_NEAR(pp::spanning_defect(c, diag).defect, std::sqrt(0.5), 1e-12);
}

TEST(SpanningDefect, SharedImageLine) {
  pp::ProjectionCollection c;
  c.ambient_dim = 3;
  auto p = pp::Projection{Eigen::Vector3d(1, 0, 0).asDiagonal().toDenseMatrix(), 1};
  c.projections = {p, p};
  pp::RngStream rng(25);
  for (int trial = 0; trial < 5; ++trial)
    EXPECT_LE(pp::spanning_defect(c, rng.gaussian_vector(3)).defect, 1e-15);
}

TEST(SpanningDefect, MatchesGramOracle) {
  pp::RngStream rng(26);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 2 + trial % 4;
    const int n = 2 + trial % 5;
    std::vector<int> ranks(n);
    for (int& k : ranks)
      k = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(m - 1));
    auto c = pp::sample_collection(m, ranks, 2600 + trial);
    Eigen::VectorXd x = rng.gaussian_vector(m);
    double d = pp::spanning_defect(c, x).defect;
    EXPECT_NEAR(d, defect_oracle(c, x), 1e-7);
    EXPECT_GE(d, 0.0);
  }
}

TEST(SpanningDefect, EvenInX) {
  auto c = pp::sample_collection(3, {1, 2, 2}, 27);
  pp::RngStream rng(28);
  Eigen::VectorXd x = rng.gaussian_vector(3);
  EXPECT_DOUBLE_EQ(pp::spanning_defect(c, x).defect,
                   pp::spanning_defect(c, -x).defect);
}

TEST(SpanningDefect, RejectsZeroVector) {
  auto c = pp::sample_collection(3, {1}, 29);
  EXPECT_THROW(pp::spanning_defect(c, Eigen::VectorXd::Zero(3)), pp::ZeroVector);
}

// Many well-spread lines push the smallest Gram eigenvalue past 1; the
// defect is a singular value, not a normalized quantity.
TEST(SpanningDefect, CanExceedOne) {
  // Nine equiangular lines: at x = e1 the image Gram is diag(27/8, 9/8)
  // by the quartic cosine sums, so the defect is sqrt(9/8) > 1. Guards
  // against clamping the defect into [0, 1].
  std::vector<double> angles;
  for (int k = 0; k < 9; ++k) angles.push_back(k * M_PI / 9);
  auto c = lines_at(angles);
  Eigen::VectorXd x(2);
  x << 1, 0;
  EXPECT_NEAR(pp::spanning_defect(c, x).defect, std::sqrt(9.0 / 8.0), 1e-12);
}

TEST(AlternatingDescent, ObjectiveMonotone) {
  auto c = pp::sample_collection(3, {1, 2, 1, 2}, 33);
  pp::RngStream rng(34);
  auto result = pp::alternating_descent(c, rng.unit_vector(3), 60, true);
  ASSERT_GE(result.objective_trace.size(), 2u);
  for (std::size_t i = 1; i < result.objective_trace.size(); ++i)
    EXPECT_LE(result.objective_trace[i],
              result.objective_trace[i - 1] * (1 + 1e-12) + 1e-300);
}

TEST(FindWitness, ObstructedRegimeAlwaysYieldsWitness) {
  for (int trial = 0; trial < 20; ++trial) {
    pp::RngStream rng(3500 + trial, 0xF);
    std::vector<int> ranks(4);
    for (int& k : ranks) k = 1 + static_cast<int>(rng.next_u64() % 2);
    auto c = pp::sample_collection(3, ranks, 3500 + trial);
    pp::SearchBudget budget;
    budget.seed = 9000 + trial;
    auto witness = pp::find_witness(c, budget);
    ASSERT_TRUE(witness.has_value()) << "trial " << trial;
    EXPECT_LE(witness->residual, 1e-8);
    EXPECT_NEAR(witness->x.norm(), 1.0, 1e-12);
    EXPECT_NEAR(witness->y.norm(), 1.0, 1e-12);
    // residual is the max bilinear form over members, recomputed.
    double check = 0;
    for (const auto& p : c.projections)
      check = std::max(check,
                       std::abs(witness->y.dot(p.matrix * witness->x)));
    EXPECT_NEAR(witness->residual, check, 1e-15);
  }
}

TEST(FindWitness, GenericThreeLinesHaveNone) {
  auto c = lines_at({0.0, M_PI / 3, 2 * M_PI / 3});
  pp::SearchBudget budget;
  budget.seed = 77;
  EXPECT_FALSE(pp::find_witness(c, budget).has_value());
}

TEST(FindWitness, RepeatedProjectionSharedGeometry) {
  pp::ProjectionCollection c;
  c.ambient_dim = 3;
  auto p = pp::Projection{Eigen::Vector3d(1, 0, 0).asDiagonal().toDenseMatrix(), 1};
  c.projections = {p, p, p};
  pp::SearchBudget budget;
  budget.seed = 78;
  auto witness = pp::find_witness(c, budget);
  ASSERT_TRUE(witness.has_value());
  EXPECT_LE(witness->residual, 1e-12);
}

TEST(FindWitness, DeterministicGivenSeed) {
  auto c = pp::sample_collection(3, {1, 2, 1, 1}, 41);
  pp::SearchBudget budget;
  budget.seed = 42;
  auto a = pp::find_witness(c, budget);
  auto b = pp::find_witness(c, budget);
  ASSERT_EQ(a.has_value(), b.has_value());
  ASSERT_TRUE(a.has_value());
  EXPECT_TRUE((a->x.array() == b->x.array()).all());
  EXPECT_TRUE((a->y.array() == b->y.array()).all());
  EXPECT_EQ(a->residual, b->residual);
}

TEST(WitnessSoundness, CollisionGapBoundedByResidual) {
  for (int trial = 0; trial < 10; ++trial) {
    auto c = pp::sample_collection(3, {1, 1, 2, 2}, 4300 + trial);
    pp::SearchBudget budget;
    budget.seed = 4400 + trial;
    auto witness = pp::find_witness(c, budget);
    ASSERT_TRUE(witness.has_value());
    auto pair = pp::collision_from_witness(c, *witness);
    EXPECT_LE(pair.max_measurement_gap, 4 * witness->residual + 1e-12);
    // The gap is recomputable from the two measurement vectors.
    Eigen::VectorXd bu = pp::measurement_map(c, pair.u);
    Eigen::VectorXd bv = pp::measurement_map(c, pair.v);
    EXPECT_NEAR(pair.max_measurement_gap,
                (bu - bv).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(CollisionFromWitness, ExactCoordinateWitness) {
  pp::ProjectionCollection c;
  c.ambient_dim = 2;
  c.projections.push_back(
      pp::Projection{Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix(), 1});
  pp::Witness w;
  w.x = Eigen::Vector2d(1, 0);
  w.y = Eigen::Vector2d(0, 1);
  w.residual = 0;
  auto pair = pp::collision_from_witness(c, w);
  EXPECT_TRUE((pair.u.array() == Eigen::Array2d(1, 1)).all());
  EXPECT_TRUE((pair.v.array() == Eigen::Array2d(1, -1)).all());
  EXPECT_EQ(pair.max_measurement_gap, 0.0);
}

TEST(CollisionFromWitness, DegenerateWhenVectorsCancel) {
  pp::ProjectionCollection c;
  c.ambient_dim = 2;
  c.projections.push_back(
      pp::Projection{Eigen::Vector2d(0, 1).asDiagonal().toDenseMatrix(), 1});
  pp::Witness w;
  w.x = Eigen::Vector2d(1, 0);
  w.y = Eigen::Vector2d(-1, 0);
  w.residual = 0;
  EXPECT_THROW(pp::collision_from_witness(c, w), pp::DegenerateWitness);
}

// Near-equal measurements force a near-zero defect along the difference
// direction: every P_i (u - v) is orthogonal to u + v.
TEST(CriticalDirection, DifferenceDirectionHasSmallDefect) {
  for (int trial = 0; trial < 10; ++trial) {
    auto c = pp::sample_collection(3, {1, 2, 1, 1}, 4600 + trial);
    pp::SearchBudget budget;
    budget.seed = 4700 + trial;
    auto witness = pp::find_witness(c, budget);
    ASSERT_TRUE(witness.has_value());
    auto pair = pp::collision_from_witness(c, *witness);
    Eigen::VectorXd bu = pp::measurement_map(c, pair.u);
    Eigen::VectorXd bv = pp::measurement_map(c, pair.v);
    ASSERT_LE((bu - bv).cwiseAbs().maxCoeff(), 1e-10);
    ASSERT_GT((pair.u - pair.v).norm(), 1e-3);
    ASSERT_GT((pair.u + pair.v).norm(), 1e-3);
    EXPECT_LE(pp::spanning_defect(c, pair.u - pair.v).defect, 1e-5);
  }
}

TEST(MinDefectSearch, ThreeLinesClosedFormFloor) {
  auto c = lines_at({0.0, M_PI / 3, 2 * M_PI / 3});
  auto [x, defect] = pp::min_defect_search(c);
  EXPECT_GT(defect, 0.3);

  // Dense closed-form scan over the angle parameter brackets the true
  // minimum; the search result may not undercut it by more than the scan
  // resolution allows.
  double oracle = 2.0;
  for (int i = 0; i <= 20000; ++i) {
    double theta = M_PI * i / 20000.0;
    Eigen::VectorXd v(2);
    v << std::cos(theta), std::sin(theta);
    oracle = std::min(oracle, defect_oracle(c, v));
  }
  EXPECT_NEAR(defect, oracle, 1e-6);
}

TEST(MinDefectSearch, LocatesForcedZeros) {
  for (int trial = 0; trial < 10; ++trial) {
    pp::RngStream rng(4900 + trial, 0xF);
    std::vector<int> ranks(4);
    for (int& k : ranks) k = 1 + static_cast<int>(rng.next_u64() % 2);
    auto c = pp::sample_collection(3, ranks, 4900 + trial);
    pp::DefectSearchBudget budget;
    budget.seed = 5000 + trial;
    auto [x, defect] = pp::min_defect_search(c, budget);
    EXPECT_LE(defect, 1e-6) << "trial " << trial;
    EXPECT_NEAR(x.norm(), 1.0, 1e-12);
  }
}

TEST(MinDefectSearch, JointKernelOfRankOnePair) {
  for (int trial = 0; trial < 5; ++trial) {
    auto c = pp::sample_collection(3, {1, 1, 2, 2}, 5100 + trial);
    // x0 spans ker P_1 intersected with ker P_2: normal to both generators.
    Eigen::MatrixXd generators = Eigen::MatrixXd(3, 2);
    generators.col(0) = pp::image_basis(c.projections[0]).basis.col(0);
    generators.col(1) = pp::image_basis(c.projections[1]).basis.col(0);
    Eigen::Vector3d x0 =
        Eigen::Vector3d(generators.col(0)).cross(Eigen::Vector3d(generators.col(1)));
    ASSERT_GT(x0.norm(), 1e-8);
    EXPECT_LE(pp::spanning_defect(c, x0).defect, 1e-12);

    pp::DefectSearchBudget budget;
    budget.seed = 5200 + trial;
    auto [x, defect] = pp::min_defect_search(c, budget);
    EXPECT_LE(defect, 1e-8);
  }
}

TEST(MinDefectSearch, DeterministicGivenBudget) {
  auto c = pp::sample_collection(3, {2, 2, 2, 2, 2}, 53);
  pp::DefectSearchBudget budget;
  budget.seed = 54;
  auto [xa, da] = pp::min_defect_search(c, budget);
  auto [xb, db] = pp::min_defect_search(c, budget);
  EXPECT_EQ(da, db);
  EXPECT_TRUE((xa.array() == xb.array()).all());
}

TEST(CertifyInjective, ThreeLinesCertify) {
  auto c = lines_at({0.0, M_PI / 3, 2 * M_PI / 3});
  pp::CertifyOptions options;
  options.mesh = 1e-3;
  auto verdict = pp::certify_injective(c, options);
  EXPECT_EQ(verdict.status, pp::VerdictStatus::CertifiedInjective);
  EXPECT_GE(verdict.min_defect_found, options.tol_cert);
  EXPECT_GT(verdict.budget.grid_nodes, 0u);
}

TEST(CertifyInjective, ObstructedRegimeFindsWitness) {
  auto c = pp::sample_collection(3, {1, 2, 2, 1}, 57);
  pp::CertifyOptions options;
  options.witness_budget.seed = 58;
  auto verdict = pp::certify_injective(c, options);
  ASSERT_EQ(verdict.status, pp::VerdictStatus::WitnessFound);
  ASSERT_TRUE(verdict.witness.has_value());
  EXPECT_LE(verdict.witness->residual, verdict.tol_witness);
}

TEST(CertifyInjective, UnreachableThresholdIsInconclusive) {
  auto c = pp::sample_collection(4, {1, 2, 3, 1, 2, 3, 2}, 59);
  pp::CertifyOptions options;
  options.tol_cert = 0.9;
  options.witness_budget.seed = 60;
  auto verdict = pp::certify_injective(c, options);
  EXPECT_EQ(verdict.status, pp::VerdictStatus::Inconclusive);
  EXPECT_FALSE(verdict.witness.has_value());
  EXPECT_LT(verdict.min_defect_found, 0.9);
}

TEST(CertifyInjective, ExplicitOverCapMeshThrows) {
  auto c = pp::sample_collection(4, {1, 1, 1, 1, 1, 1, 1}, 61);
  pp::CertifyOptions options;
  options.mesh = 1e-2;
  EXPECT_THROW(pp::certify_injective(c, options), pp::BudgetExceeded);
}

TEST(ComplementProperty, ThreeLinesHold) {
  auto result = pp::complement_property(lines_at({0.0, M_PI / 3, 2 * M_PI / 3}));
  EXPECT_TRUE(result.holds);
  EXPECT_TRUE(result.failing_partition.empty());
}

TEST(ComplementProperty, TwoOrthogonalLinesFail) {
  auto result = pp::complement_property(lines_at({0.0, M_PI / 2}));
  ASSERT_FALSE(result.holds);
  // One singleton side; neither line spans the plane alone.
  ASSERT_EQ(result.failing_partition.size(), 1u);
  EXPECT_TRUE(result.failing_partition[0] == 1 ||
              result.failing_partition[0] == 2);
}

TEST(ComplementProperty, StandardBasisPlusDiagonalFails) {
  pp::ProjectionCollection c;
  c.ambient_dim = 3;
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(3, 1);
    basis(axis, 0) = 1;
    c.projections.push_back(pp::projection_from_basis(basis));
  }
  Eigen::MatrixXd diag(3, 1);
  diag << 1, 1, 1;
  c.projections.push_back(pp::projection_from_basis(diag));
  auto result = pp::complement_property(c);
  EXPECT_FALSE(result.holds);
  EXPECT_FALSE(result.failing_partition.empty());
  EXPECT_FALSE(complement_property_oracle(c));
}

TEST(ComplementProperty, AgreesWithBruteForceOracle) {
  pp::RngStream rng(63);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 2 + trial % 2;
    const int n = 2 + trial % 5;
    auto c = pp::sample_collection(m, std::vector<int>(n, 1), 6300 + trial);
    auto result = pp::complement_property(c);
    EXPECT_EQ(result.holds, complement_property_oracle(c)) << "trial " << trial;
    if (!result.holds) {
      // Returned partition must itself be a violation: neither side spans.
      Eigen::MatrixXd generators = pp::frame_vectors(c);
      std::vector<bool> in_side(n, false);
      for (int i : result.failing_partition) in_side[i - 1] = true;
      for (bool side : {true, false}) {
        Eigen::MatrixXd subset(m, n);
        int cols = 0;
        for (int i = 0; i < n; ++i)
          if (in_side[i] == side) subset.col(cols++) = generators.col(i);
        if (cols < m) continue;  // too few lines to span, violation immediate
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(subset.leftCols(cols));
        EXPECT_LT(svd.singularValues().minCoeff(), 1e-8);
      }
    }
  }
}

TEST(ComplementProperty, RejectsHigherRank) {
  auto c = pp::sample_collection(3, {1, 2}, 64);
  EXPECT_THROW(pp::complement_property(c), pp::NonRankOne);
}

TEST(ComplementProperty, HonorsPartitionCap) {
  auto c = pp::sample_collection(2, std::vector<int>(5, 1), 65);
  EXPECT_THROW(pp::complement_property(c, 4), pp::PartitionCapExceeded);
}

TEST(Verdict, StatusStrings) {
  EXPECT_STREQ(pp::to_string(pp::VerdictStatus::CertifiedInjective),
               "CertifiedInjective");
  EXPECT_STREQ(pp::to_string(pp::VerdictStatus::WitnessFound), "WitnessFound");
  EXPECT_STREQ(pp::to_string(pp::VerdictStatus::Inconclusive), "Inconclusive");
}

}  // namespace
