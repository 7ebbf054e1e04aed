#include "projphase/injectivity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "projphase/parallel.hpp"
#include "projphase/rng.hpp"
#include "projphase/sphere_grid.hpp"

namespace projphase {

namespace {

void check_vector_dim(const ProjectionCollection& collection,
                      const Eigen::VectorXd& x, const char* where) {
  if (x.size() != collection.ambient_dim) {
    std::ostringstream msg;
    msg << where << ": vector has dimension " << x.size()
        << ", collection lives in dimension " << collection.ambient_dim;
    throw DimensionMismatch(msg.str());
  }
}

// Defect from the eigenvalue of G(x); fast, used for bulk grid scans where
// absolute accuracy near zero is irrelevant.
double defect_from_gram(const ProjectionCollection& collection,
                        const Eigen::VectorXd& unit_x) {
  const int m = collection.ambient_dim;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd image(m);
  for (const auto& p : collection.projections) {
    image.noalias() = p.matrix * unit_x;
    gram.selfadjointView<Eigen::Lower>().rankUpdate(image);
  }
  double lambda_min;
  if (m == 2 || m == 3) {
    // Closed-form path; plenty accurate against certification thresholds.
    if (m == 2) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es;
      es.computeDirect(Eigen::Matrix2d(gram.selfadjointView<Eigen::Lower>()),
                       Eigen::EigenvaluesOnly);
      lambda_min = es.eigenvalues()[0];
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
      es.computeDirect(Eigen::Matrix3d(gram.selfadjointView<Eigen::Lower>()),
                       Eigen::EigenvaluesOnly);
      lambda_min = es.eigenvalues()[0];
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        Eigen::MatrixXd(gram.selfadjointView<Eigen::Lower>()),
        Eigen::EigenvaluesOnly);
    lambda_min = es.eigenvalues()[0];
  }
  return std::sqrt(std::max(0.0, lambda_min));
}

// Least eigenvector with a deterministic tie-break: among eigenvectors of
// the minimal eigenvalue (within a tiny cluster tolerance), the one whose
// absolute-value sequence is lexicographically largest, sign-canonicalized.
Eigen::VectorXd least_eigenvector(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const auto& values = es.eigenvalues();
  const int n = static_cast<int>(sym.rows());
  const double spread = std::max(1.0, std::abs(values[n - 1]));
  const double cluster = values[0] + 1e-12 * spread;

  int pick = 0;
  for (int i = 1; i < n && values[i] <= cluster; ++i) {
    const auto& a = es.eigenvectors().col(pick);
    const auto& b = es.eigenvectors().col(i);
    for (int j = 0; j < n; ++j) {
      const double da = std::abs(a[j]);
      const double db = std::abs(b[j]);
      if (db > da + 1e-12) {
        pick = i;
        break;
      }
      if (da > db + 1e-12) break;
    }
  }
  return sign_canonicalize(es.eigenvectors().col(pick));
}

double witness_residual(const ProjectionCollection& collection,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double worst = 0;
  for (const auto& p : collection.projections)
    worst = std::max(worst, std::abs(y.dot(p.matrix * x)));
  return worst;
}

// Damped Gauss-Newton on the bilinear residuals r_i = y^t P_i x over
// (x, y), renormalized each step. The alternating scheme contracts only
// linearly, sometimes with rate near 1; this supplies the quadratic tail.
void polish_witness(const ProjectionCollection& collection, Eigen::VectorXd& x,
                    Eigen::VectorXd& y, double& residual) {
  const int m = collection.ambient_dim;
  const int n = collection.count();
  Eigen::VectorXd r(n);
  Eigen::MatrixXd jacobian(n, 2 * m);

  auto sum_sq = [&](const Eigen::VectorXd& xx, const Eigen::VectorXd& yy) {
    double g = 0;
    for (const auto& p : collection.projections) {
      const double term = yy.dot(p.matrix * xx);
      g += term * term;
    }
    return g;
  };

  double g = sum_sq(x, y);
  double lambda = 1e-10;
  for (int iter = 0; iter < 25 && g > 1e-34; ++iter) {
    for (int i = 0; i < n; ++i) {
      const auto& p = collection.projections[i].matrix;
      const Eigen::VectorXd px = p * x;
      const Eigen::VectorXd py = p * y;
      r[i] = y.dot(px);
      jacobian.row(i).head(m) = py.transpose();
      jacobian.row(i).tail(m) = px.transpose();
    }
    Eigen::MatrixXd normal = jacobian.transpose() * jacobian;
    normal.diagonal().array() += lambda;
    const Eigen::VectorXd step = normal.ldlt().solve(-jacobian.transpose() * r);

    Eigen::VectorXd x_try = x + step.head(m);
    Eigen::VectorXd y_try = y + step.tail(m);
    const double nx = x_try.norm();
    const double ny = y_try.norm();
    if (nx < 1e-8 || ny < 1e-8) break;
    x_try /= nx;
    y_try /= ny;
    const double g_try = sum_sq(x_try, y_try);
    if (g_try < g) {
      x = x_try;
      y = y_try;
      g = g_try;
      lambda = std::max(lambda / 10.0, 1e-12);
    } else {
      lambda *= 100.0;
      if (lambda > 1e8) break;
    }
  }
  residual = witness_residual(collection, x, y);
}

// Alternating descent followed by the Gauss-Newton polish; the polished
// pair replaces the result only when it lowers the residual.
AlternatingResult descend_and_polish(const ProjectionCollection& collection,
                                     const Eigen::VectorXd& x0,
                                     int max_alternations) {
  AlternatingResult result =
      alternating_descent(collection, x0, max_alternations);
  Eigen::VectorXd x = result.x;
  Eigen::VectorXd y = result.y;
  double residual = result.residual;
  polish_witness(collection, x, y, residual);
  if (residual < result.residual) {
    result.x = sign_canonicalize(x);
    result.y = sign_canonicalize(y);
    result.residual = residual;
  }
  return result;
}

struct WitnessSearchDetail {
  Eigen::VectorXd best_x;
  Eigen::VectorXd best_y;
  double best_residual = std::numeric_limits<double>::infinity();
  int restarts_run = 0;
  long long total_alternations = 0;
};

WitnessSearchDetail witness_search(const ProjectionCollection& collection,
                                   const SearchBudget& budget,
                                   double tol_witness) {
  const int restarts = std::max(1, budget.restarts);
  const double early_exit = tol_witness / 10.0;

  struct Slot {
    bool computed = false;
    AlternatingResult result;
  };
  std::vector<Slot> slots(restarts);
  // Lowest restart index that already met the early-exit bar; later indices
  // may be skipped entirely, which never changes the merged answer.
  std::atomic<long long> first_hit{std::numeric_limits<long long>::max()};

  parallel_for(static_cast<std::size_t>(restarts), [&](std::size_t r) {
    if (static_cast<long long>(r) > first_hit.load(std::memory_order_relaxed))
      return;
    RngStream stream(budget.seed, r);
    const Eigen::VectorXd x0 = stream.unit_vector(collection.ambient_dim);
    slots[r].result =
        descend_and_polish(collection, x0, budget.max_alternations);
    slots[r].computed = true;
    if (slots[r].result.residual < early_exit) {
      long long expected = first_hit.load(std::memory_order_relaxed);
      const auto mine = static_cast<long long>(r);
      while (mine < expected &&
             !first_hit.compare_exchange_weak(expected, mine)) {
      }
    }
  });

  const long long stop =
      std::min<long long>(first_hit.load(), restarts - 1);
  WitnessSearchDetail detail;
  for (long long r = 0; r <= stop; ++r) {
    if (!slots[r].computed) continue;
    ++detail.restarts_run;
    detail.total_alternations += slots[r].result.alternations;
    if (slots[r].result.residual < detail.best_residual) {
      detail.best_residual = slots[r].result.residual;
      detail.best_x = slots[r].result.x;
      detail.best_y = slots[r].result.y;
    }
  }
  return detail;
}

}  // namespace

const char* to_string(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::CertifiedInjective:
      return "CertifiedInjective";
    case VerdictStatus::WitnessFound:
      return "WitnessFound";
    case VerdictStatus::Inconclusive:
      return "Inconclusive";
  }
  return "unknown";
}

Eigen::VectorXd measurement_map(const ProjectionCollection& collection,
                                const Eigen::VectorXd& x) {
  check_vector_dim(collection, x, "measurement_map");
  Eigen::VectorXd values(collection.count());
  for (int i = 0; i < collection.count(); ++i)
    values[i] = x.dot(collection.projections[i].matrix * x);
  return values;
}

Eigen::MatrixXd image_gram(const ProjectionCollection& collection,
                           const Eigen::VectorXd& x) {
  check_vector_dim(collection, x, "image_gram");
  const int m = collection.ambient_dim;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd image(m);
  for (const auto& p : collection.projections) {
    image.noalias() = p.matrix * x;
    gram.selfadjointView<Eigen::Lower>().rankUpdate(image);
  }
  return Eigen::MatrixXd(gram.selfadjointView<Eigen::Lower>());
}

SpanningDefect spanning_defect(const ProjectionCollection& collection,
                               const Eigen::VectorXd& x) {
  check_vector_dim(collection, x, "spanning_defect");
  const double norm = x.norm();
  if (!(norm > 0)) throw ZeroVector("spanning_defect: x must be nonzero");
  const Eigen::VectorXd unit = x / norm;

  const int m = collection.ambient_dim;
  const int n = collection.count();
  // SVD of the stacked images keeps absolute accuracy near zero, where the
  // squared form G(x) would lose half the digits.
  Eigen::MatrixXd stacked(m, n);
  for (int i = 0; i < n; ++i)
    stacked.col(i).noalias() = collection.projections[i].matrix * unit;
  double defect = 0;
  if (n >= m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
    defect = svd.singularValues()[m - 1];
  }
  return SpanningDefect{unit, defect};
}

AlternatingResult alternating_descent(const ProjectionCollection& collection,
                                      const Eigen::VectorXd& x0,
                                      int max_alternations,
                                      bool record_trace) {
  check_vector_dim(collection, x0, "alternating_descent");
  const double norm = x0.norm();
  if (!(norm > 0)) throw ZeroVector("alternating_descent: x0 must be nonzero");

  AlternatingResult out;
  Eigen::VectorXd x = x0 / norm;
  Eigen::MatrixXd gram = image_gram(collection, x);
  Eigen::VectorXd y = least_eigenvector(gram);
  if (record_trace) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram,
                                                      Eigen::EigenvaluesOnly);
    out.objective_trace.push_back(std::max(0.0, es.eigenvalues()[0]));
  }

  double best_residual = witness_residual(collection, x, y);
  Eigen::VectorXd best_x = x;
  Eigen::VectorXd best_y = y;
  int stalled = 0;

  for (int it = 0; it < max_alternations; ++it) {
    ++out.alternations;
    x = least_eigenvector(image_gram(collection, y));
    if (record_trace) {
      // g after the x half-step equals lambda_min of G(y).
      double g = 0;
      for (const auto& p : collection.projections) {
        const double term = y.dot(p.matrix * x);
        g += term * term;
      }
      out.objective_trace.push_back(g);
    }
    gram = image_gram(collection, x);
    y = least_eigenvector(gram);
    if (record_trace) {
      double g = 0;
      for (const auto& p : collection.projections) {
        const double term = y.dot(p.matrix * x);
        g += term * term;
      }
      out.objective_trace.push_back(g);
    }

    const double residual = witness_residual(collection, x, y);
    const double previous_best = best_residual;
    if (residual < best_residual) {
      best_residual = residual;
      best_x = x;
      best_y = y;
    }
    if (residual <= 1e-16) break;
    // Stop once several rounds in a row fail to beat the best by 1%; a run
    // still contracting toward a true zero keeps improving well past that.
    if (residual > 0.99 * previous_best) {
      if (++stalled >= 8) break;
    } else {
      stalled = 0;
    }
  }

  out.x = sign_canonicalize(best_x);
  out.y = sign_canonicalize(best_y);
  out.residual = best_residual;
  return out;
}

std::optional<Witness> find_witness(const ProjectionCollection& collection,
                                    const SearchBudget& budget,
                                    double tol_witness) {
  const auto detail = witness_search(collection, budget, tol_witness);
  if (detail.best_residual <= tol_witness)
    return Witness{detail.best_x, detail.best_y, detail.best_residual};
  return std::nullopt;
}

std::pair<Eigen::VectorXd, double> min_defect_search(
    const ProjectionCollection& collection, const DefectSearchBudget& budget) {
  const int m = collection.ambient_dim;
  const auto grid =
      coarse_sphere_grid(m, std::max(8, budget.grid_points), budget.seed);

  std::vector<double> grid_defects(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    grid_defects[i] = defect_from_gram(collection, grid[i]);
  });

  // Indices of the lowest grid values, ascending by (defect, index).
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t keep =
      std::min<std::size_t>(std::max(1, budget.refine_top), order.size());
  std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (grid_defects[a] != grid_defects[b])
                        return grid_defects[a] < grid_defects[b];
                      return a < b;
                    });

  Eigen::VectorXd best_x = grid[order[0]];
  double best = spanning_defect(collection, best_x).defect;

  auto consider = [&](const Eigen::VectorXd& candidate) {
    const double value = spanning_defect(collection, candidate).defect;
    if (value < best) {
      best = value;
      best_x = candidate;
    }
  };

  for (std::size_t s = 0; s < keep; ++s) {
    const auto refined = descend_and_polish(collection, grid[order[s]],
                                            budget.max_alternations);
    // Witness zeros come in (x, y) pairs; both are defect minimizers.
    consider(refined.x);
    consider(refined.y);
  }

  return {sign_canonicalize(best_x), best};
}

InjectivityVerdict certify_injective(const ProjectionCollection& collection,
                                     const CertifyOptions& options) {
  const int m = collection.ambient_dim;
  const int n = collection.count();

  InjectivityVerdict verdict;
  verdict.tol_cert = options.tol_cert;
  verdict.tol_witness = options.tol_witness;

  double mesh = options.mesh;
  const bool auto_mesh = std::isnan(mesh);
  if (auto_mesh) mesh = (m <= 3) ? 1e-2 : 5e-2;

  double grid_min = std::numeric_limits<double>::infinity();
  bool have_grid = false;

  if (m <= 4) {
    bool build_grid = true;
    if (auto_mesh &&
        CoveringGrid::node_count(m, mesh) > options.node_cap)
      build_grid = false;  // default mesh never exceeds the cap for M <= 4
    if (build_grid) {
      const auto grid = CoveringGrid::build(m, mesh, options.node_cap);
      const std::uint64_t total = grid.size();
      verdict.budget.grid_nodes = total;
      verdict.budget.mesh = mesh;

      const int chunks = std::max(1, worker_count() * 4);
      const std::uint64_t chunk_len = (total + chunks - 1) / chunks;
      std::vector<double> chunk_min(chunks,
                                    std::numeric_limits<double>::infinity());
      parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
        const std::uint64_t begin = c * chunk_len;
        const std::uint64_t end = std::min(total, begin + chunk_len);
        double local = std::numeric_limits<double>::infinity();
        for (std::uint64_t i = begin; i < end; ++i)
          local = std::min(local,
                           defect_from_gram(collection, grid.point(i)));
        chunk_min[c] = local;
      });
      for (const double v : chunk_min) grid_min = std::min(grid_min, v);
      have_grid = true;

      const double threshold =
          options.tol_cert + std::sqrt(static_cast<double>(n)) * mesh;
      if (grid_min >= threshold) {
        verdict.status = VerdictStatus::CertifiedInjective;
        verdict.min_defect_found = grid_min;
        return verdict;
      }
    }
  }

  const auto detail =
      witness_search(collection, options.witness_budget, options.tol_witness);
  verdict.budget.restarts = detail.restarts_run;
  verdict.budget.alternations = detail.total_alternations;

  double min_found = have_grid ? grid_min : std::numeric_limits<double>::infinity();
  if (detail.best_x.size() == m)
    min_found =
        std::min(min_found, spanning_defect(collection, detail.best_x).defect);
  verdict.min_defect_found = std::isfinite(min_found) ? min_found : 0.0;

  if (detail.best_residual <= options.tol_witness) {
    verdict.status = VerdictStatus::WitnessFound;
    verdict.witness =
        Witness{detail.best_x, detail.best_y, detail.best_residual};
  } else {
    verdict.status = VerdictStatus::Inconclusive;
  }
  return verdict;
}

ComplementPropertyResult complement_property(const ProjectionCollection& lines,
                                             std::uint64_t max_partitions,
                                             double rank_scale) {
  const int n = lines.count();
  const int m = lines.ambient_dim;
  if (n < 1) throw InvalidInput("collection must be nonempty");
  for (int i = 0; i < n; ++i) {
    if (lines.projections[i].rank != 1)
      throw NonRankOne("complement property needs rank-one projections");
  }
  if (n > 63 || (std::uint64_t{1} << (n - 1)) > max_partitions) {
    std::ostringstream msg;
    msg << "partition enumeration needs 2^" << (n - 1)
        << " subsets, cap is " << max_partitions;
    throw PartitionCapExceeded(msg.str());
  }

  // Unit generators; for P = v v^t the largest column is parallel to v.
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

  auto spans = [&](const std::vector<int>& idx) {
    if (static_cast<int>(idx.size()) < m) return false;
    Eigen::MatrixXd sub(m, idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c)
      sub.col(c) = generators.col(idx[c]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
    const auto& sigma = svd.singularValues();
    return sigma[m - 1] > rank_scale * sigma[0];
  };

  // Index 0 stays on the left side, which enumerates each unordered
  // partition exactly once.
  const std::uint64_t half = std::uint64_t{1} << (n - 1);
  for (std::uint64_t mask = 0; mask < half; ++mask) {
    std::vector<int> left{0}, right;
    for (int i = 1; i < n; ++i) {
      if (mask & (std::uint64_t{1} << (i - 1)))
        left.push_back(i);
      else
        right.push_back(i);
    }
    if (!spans(left) && !spans(right)) {
      ComplementPropertyResult result;
      result.holds = false;
      for (const int i : left) result.failing_partition.push_back(i + 1);
      return result;
    }
  }
  return ComplementPropertyResult{true, {}};
}

CollisionPair collision_from_witness(const ProjectionCollection& collection,
                                     const Witness& witness) {
  check_vector_dim(collection, witness.x, "collision_from_witness");
  check_vector_dim(collection, witness.y, "collision_from_witness");
  const Eigen::VectorXd u = witness.x + witness.y;
  const Eigen::VectorXd v = witness.x - witness.y;
  if (u.norm() < 1e-10 || v.norm() < 1e-10)
    throw DegenerateWitness("witness vectors are numerically parallel");
  const Eigen::VectorXd mu = measurement_map(collection, u);
  const Eigen::VectorXd mv = measurement_map(collection, v);
  return CollisionPair{u, v, (mu - mv).cwiseAbs().maxCoeff()};
}

}  // namespace projphase
