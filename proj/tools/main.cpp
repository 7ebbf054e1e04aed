#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "projphase/ccpw_demo.hpp"
#include "projphase/errors.hpp"
#include "projphase/injectivity.hpp"
#include "projphase/json_io.hpp"
#include "projphase/parallel.hpp"
#include "projphase/projection.hpp"
#include "projphase/reconstruction.hpp"
#include "projphase/rng.hpp"
#include "projphase/sharpness.hpp"

namespace pp = projphase;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitBudget = 3;

// Substream key for (master, a, b, c), chained the same way RngStream
// derives its lanes so trial streams never collide across cells.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b, std::uint64_t c) {
  std::uint64_t state = master;
  for (std::uint64_t lane : {a, b, c}) {
    state += 0x9e3779b97f4a7c15ULL * (lane + 1);
    pp::splitmix64(state);
  }
  return pp::splitmix64(state);
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
    if (text.empty() || text.back() != '\n') std::fputc('\n', stdout);
  } else {
    pp::write_text_file(out_path, text);
  }
}

json parse_json_file(const std::string& path) {
  json doc = json::parse(pp::read_text_file(path), nullptr, false);
  if (doc.is_discarded()) throw pp::SchemaError("/", "not valid JSON: " + path);
  return doc;
}

std::vector<int> parse_range(const std::string& text) {
  auto colon = text.find(':');
  try {
    if (colon == std::string::npos) return {std::stoi(text)};
    int lo = std::stoi(text.substr(0, colon));
    int hi = std::stoi(text.substr(colon + 1));
    if (hi < lo) throw pp::InvalidInput("empty range: " + text);
    std::vector<int> values;
    for (int v = lo; v <= hi; ++v) values.push_back(v);
    return values;
  } catch (const std::logic_error&) {
    throw pp::InvalidInput("range must be 'n' or 'lo:hi', got: " + text);
  }
}

std::vector<int> random_ranks(int ambient_dim, int count, std::uint64_t seed) {
  pp::RngStream rng(seed, 0xA11);
  std::vector<int> ranks(count);
  for (int& k : ranks)
    k = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(
                                                  ambient_dim - 1));
  return ranks;
}

std::string profile_string(const std::vector<int>& ranks) {
  std::string out;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(ranks[i]);
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  std::size_t h = values.size() / 2;
  return values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
}

struct CommonOptions {
  std::uint64_t seed = 0;
  double tol_witness = pp::kDefaultTolerances.witness;
  double tol_cert = pp::kDefaultTolerances.certify;
  int restarts = 50;
  double grid = std::numeric_limits<double>::quiet_NaN();
  std::string out;
  bool strict = false;
};

void add_common(CLI::App* cmd, CommonOptions* common, bool budget_flags) {
  cmd->add_option("--seed", common->seed, "Master seed");
  cmd->add_option("--out", common->out, "Write the primary output here");
  cmd->add_flag("--strict", common->strict,
                "Exit 3 on inconclusive or budget-limited outcomes");
  if (budget_flags) {
    cmd->add_option("--tol-witness", common->tol_witness,
                    "Residual threshold for accepting a witness");
    cmd->add_option("--tol-cert", common->tol_cert,
                    "Defect threshold for certification");
    cmd->add_option("--restarts", common->restarts,
                    "Multi-start budget for searches");
    cmd->add_option("--grid", common->grid,
                    "Certification grid mesh (default: dimension based)");
  }
}

int cmd_sample(int ambient_dim, int count, std::vector<int> ranks,
               const CommonOptions& common) {
  if (count < 1) throw pp::InvalidInput("N must be at least 1");
  if (ranks.empty()) ranks = random_ranks(ambient_dim, count, common.seed);
  if (static_cast<int>(ranks.size()) != count)
    throw pp::InvalidInput("--ranks must list exactly N ranks");
  auto collection = pp::sample_collection(ambient_dim, ranks, common.seed);

  double worst = 0;
  for (const auto& p : collection.projections) {
    worst = std::max(worst, (p.matrix * p.matrix - p.matrix)
                                .cwiseAbs()
                                .maxCoeff());
    if (!pp::validate(p).empty())
      throw pp::InvariantError("sampled projection failed validation");
  }
  std::fprintf(stderr,
               "sampled M=%d N=%d ranks=%s seed=%llu; all valid, worst "
               "idempotency gap %.3e\n",
               ambient_dim, count, profile_string(ranks).c_str(),
               static_cast<unsigned long long>(common.seed), worst);
  emit(pp::to_json(collection).dump(2), common.out);
  return kExitOk;
}

int cmd_check(const std::string& path, const CommonOptions& common) {
  auto collection = pp::load_collection(path);
  pp::CertifyOptions options;
  options.mesh = common.grid;
  options.tol_cert = common.tol_cert;
  options.tol_witness = common.tol_witness;
  options.witness_budget.restarts = common.restarts;
  options.witness_budget.seed = common.seed;
  auto verdict = pp::certify_injective(collection, options);

  std::fprintf(stderr, "status=%s min_defect=%.6e grid_nodes=%llu mesh=%.3e\n",
               pp::to_string(verdict.status), verdict.min_defect_found,
               static_cast<unsigned long long>(verdict.budget.grid_nodes),
               verdict.budget.mesh);
  if (verdict.witness)
    std::fprintf(stderr, "witness residual=%.6e\n", verdict.witness->residual);

  auto profile = collection.rank_profile();
  bool all_rank_one =
      std::all_of(profile.begin(), profile.end(), [](int k) { return k == 1; });
  if (all_rank_one && collection.count() <= 16) {
    auto cp = pp::complement_property(collection);
    bool verdict_injective = verdict.status == pp::VerdictStatus::CertifiedInjective;
    bool verdict_witness = verdict.status == pp::VerdictStatus::WitnessFound;
    const char* agreement = "consistent";
    if ((cp.holds && verdict_witness) || (!cp.holds && verdict_injective))
      agreement = "DISAGREES";
    std::string partition;
    for (int i : cp.failing_partition)
      partition += (partition.empty() ? "" : ",") + std::to_string(i);
    std::fprintf(stderr, "complement property: %s%s%s (%s with verdict)\n",
                 cp.holds ? "holds" : "fails at {",
                 cp.holds ? "" : partition.c_str(), cp.holds ? "" : "}",
                 agreement);
  }

  emit(pp::to_json(verdict).dump(2), common.out);
  if (common.strict && verdict.status == pp::VerdictStatus::Inconclusive)
    return kExitBudget;
  return kExitOk;
}

int cmd_witness(const std::string& path, const CommonOptions& common) {
  auto collection = pp::load_collection(path);
  pp::SearchBudget budget;
  budget.restarts = common.restarts;
  budget.seed = common.seed;
  auto witness = pp::find_witness(collection, budget, common.tol_witness);
  if (!witness) {
    std::fprintf(stderr, "no witness at tol %.3e within %d restarts\n",
                 common.tol_witness, budget.restarts);
    emit(json{{"witness", nullptr}}.dump(2), common.out);
    return common.strict ? kExitBudget : kExitOk;
  }
  auto collision = pp::collision_from_witness(collection, *witness);
  std::fprintf(stderr, "witness residual=%.6e collision gap=%.6e\n",
               witness->residual, collision.max_measurement_gap);
  json doc{{"witness", pp::to_json(*witness)},
           {"collision", pp::to_json(collision)}};
  emit(doc.dump(2), common.out);
  return kExitOk;
}

int cmd_reconstruct(const std::string& path, const std::string& measurements_path,
                    const std::vector<double>& from_x, int restarts,
                    const std::string& csv_path, const CommonOptions& common) {
  auto collection = pp::load_collection(path);
  pp::MeasurementVector b;
  Eigen::VectorXd truth;
  if (!from_x.empty()) {
    if (!measurements_path.empty())
      throw pp::InvalidInput("pass either --measurements or --from-x, not both");
    truth = Eigen::Map<const Eigen::VectorXd>(from_x.data(),
                                              static_cast<long>(from_x.size()));
    if (truth.size() != collection.ambient_dim)
      throw pp::DimensionMismatch("--from-x must have M entries");
    b = pp::make_measurements(pp::measurement_map(collection, truth), collection,
                              path);
  } else if (!measurements_path.empty()) {
    b = pp::measurements_from_json(parse_json_file(measurements_path), collection);
  } else {
    throw pp::InvalidInput("one of --measurements or --from-x is required");
  }

  pp::ReconstructionBudget budget;
  budget.restarts = restarts;
  budget.seed = common.seed;
  auto result = pp::reconstruct(collection, b, budget);
  double err = truth.size() ? pp::recovery_error(result.x_hat, truth)
                            : std::numeric_limits<double>::quiet_NaN();

  std::fprintf(stderr, "residual=%.6e converged=%s restarts_used=%d",
               result.residual, result.converged ? "true" : "false",
               result.restarts_used);
  if (truth.size()) std::fprintf(stderr, " recovery_error=%.6e", err);
  if (!result.alternatives.empty())
    std::fprintf(stderr, " alternatives=%zu", result.alternatives.size());
  std::fputc('\n', stderr);

  json doc = pp::to_json(result);
  if (truth.size()) doc["recovery_error"] = err;
  emit(doc.dump(2), common.out);

  if (!csv_path.empty()) {
    std::ifstream probe(csv_path);
    bool fresh = !probe.good() || probe.peek() == std::ifstream::traits_type::eof();
    probe.close();
    std::ofstream csv(csv_path, std::ios::app);
    if (fresh)
      csv << "seed,M,N,rank_profile,residual,recovery_error,restarts_used,"
             "converged\n";
    csv << pp::reconstruction_csv_row(common.seed, collection, result, err)
        << '\n';
  }
  return common.strict && !result.converged ? kExitBudget : kExitOk;
}

struct SweepCell {
  int ambient_dim = 0;
  int count = 0;
  std::string profile_label;
  int trials = 0;
  int injective = 0;
  int witnesses = 0;
  int inconclusive = 0;
  double median_min_defect = 0;
  double median_witness_residual = 0;
  double wall_time_s = 0;
};

SweepCell run_sweep_cell(int ambient_dim, int count,
                         const std::vector<int>& fixed_ranks, int trials,
                         std::uint64_t master_seed, const CommonOptions& common) {
  SweepCell cell;
  cell.ambient_dim = ambient_dim;
  cell.count = count;
  cell.trials = trials;
  cell.profile_label =
      fixed_ranks.empty() ? "random" : profile_string(fixed_ranks);

  auto start = std::chrono::steady_clock::now();
  std::vector<double> defects(trials);
  std::vector<double> residuals(trials,
                                std::numeric_limits<double>::quiet_NaN());
  std::vector<char> verdicts(trials);

  pp::parallel_for(trials, [&](int trial) {
    std::uint64_t trial_seed = derive_seed(
        master_seed, static_cast<std::uint64_t>(ambient_dim),
        static_cast<std::uint64_t>(count), static_cast<std::uint64_t>(trial));
    auto ranks = fixed_ranks.empty()
                     ? random_ranks(ambient_dim, count, trial_seed)
                     : fixed_ranks;
    auto collection = pp::sample_collection(ambient_dim, ranks, trial_seed);

    pp::SearchBudget budget;
    budget.restarts = common.restarts;
    budget.seed = derive_seed(trial_seed, 0xB1, 0, 0);
    auto witness = pp::find_witness(collection, budget, common.tol_witness);
    if (witness) {
      verdicts[trial] = 'w';
      residuals[trial] = witness->residual;
      defects[trial] = pp::spanning_defect(collection, witness->x).defect;
      return;
    }
    pp::DefectSearchBudget defect_budget;
    defect_budget.seed = derive_seed(trial_seed, 0xD2, 0, 0);
    auto [x, defect] = pp::min_defect_search(collection, defect_budget);
    defects[trial] = defect;
    verdicts[trial] = defect >= common.tol_cert ? 'i' : '?';
  });

  std::vector<double> witness_residuals;
  for (int t = 0; t < trials; ++t) {
    if (verdicts[t] == 'w') {
      ++cell.witnesses;
      witness_residuals.push_back(residuals[t]);
    } else if (verdicts[t] == 'i') {
      ++cell.injective;
    } else {
      ++cell.inconclusive;
    }
  }
  cell.median_min_defect = median(defects);
  cell.median_witness_residual = median(std::move(witness_residuals));
  cell.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return cell;
}

int cmd_sweep(const std::string& config_path, const CommonOptions& common) {
  json config = parse_json_file(config_path);
  if (!config.is_object()) throw pp::SchemaError("/", "config must be an object");

  auto int_list = [&](const char* key) {
    std::vector<int> values;
    if (!config.contains(key) || !config[key].is_array() || config[key].empty())
      throw pp::SchemaError(std::string("/") + key,
                            "required nonempty integer array");
    for (const auto& v : config[key]) {
      if (!v.is_number_integer())
        throw pp::SchemaError(std::string("/") + key, "entries must be integers");
      values.push_back(v.get<int>());
    }
    return values;
  };
  auto M_values = int_list("M_values");
  auto N_values = int_list("N_values");
  int trials = config.value("trials", 0);
  if (trials < 1) throw pp::SchemaError("/trials", "must be at least 1");
  std::uint64_t master_seed = config.value("seed", common.seed);

  std::vector<int> fixed_ranks;
  if (config.contains("rank_policy") && config["rank_policy"].is_array()) {
    for (const auto& v : config["rank_policy"]) fixed_ranks.push_back(v.get<int>());
  } else if (config.contains("rank_policy") &&
             config["rank_policy"] != "random") {
    throw pp::SchemaError("/rank_policy", "must be \"random\" or a rank array");
  }

  std::string out_path = !common.out.empty() ? common.out
                                             : config.value("out_csv", "");

  std::ostringstream csv;
  csv << "M,N,rank_profile,trials,injective_count,witness_count,"
         "inconclusive_count,median_min_defect,median_witness_residual,"
         "wall_time_s\n";
  for (int M : M_values) {
    for (int N : N_values) {
      if (!fixed_ranks.empty()) {
        if (static_cast<int>(fixed_ranks.size()) != N)
          throw pp::SchemaError("/rank_policy",
                                "fixed rank list length must equal every N");
        for (int k : fixed_ranks)
          if (k < 1 || k > M - 1)
            throw pp::SchemaError("/rank_policy", "ranks must lie in [1, M-1]");
      }
      auto cell = run_sweep_cell(M, N, fixed_ranks, trials, master_seed, common);
      csv << cell.ambient_dim << ',' << cell.count << ','
          << cell.profile_label << ',' << cell.trials << ','
          << cell.injective << ',' << cell.witnesses << ','
          << cell.inconclusive << ',' << pp::format_double(cell.median_min_defect)
          << ',' << pp::format_double(cell.median_witness_residual) << ','
          << pp::format_double(cell.wall_time_s) << '\n';
      std::fprintf(stderr, "cell M=%d N=%d done: %d injective, %d witness, %d "
                   "inconclusive (%.2fs)\n",
                   M, N, cell.injective, cell.witnesses, cell.inconclusive,
                   cell.wall_time_s);
    }
  }
  emit(csv.str(), out_path);
  return kExitOk;
}

json demo_report_json(const pp::CcpwDemoReport& report, std::uint64_t seed) {
  auto basis_json = [](const Eigen::Matrix3d& basis) {
    json cols = json::array();
    for (int c = 0; c < 3; ++c) {
      json col = json::array();
      for (int r = 0; r < 3; ++r) col.push_back(basis(r, c));
      cols.push_back(col);
    }
    return cols;
  };
  json doc;
  doc["seed"] = seed;
  doc["spark"] = {{"min_subset_det", report.min_subset_det},
                  {"attempts", report.spark_attempts}};
  doc["phi"] = basis_json(report.phi);
  doc["psi"] = basis_json(report.psi);
  doc["family_ranks"] = report.family.rank_profile();
  doc["family_verdict"] = pp::to_json(report.family_verdict);
  doc["complement_verdict"] = pp::to_json(report.complement_verdict);
  doc["witness_distance_to_phi3"] = report.witness_distance_to_phi3;
  if (report.complement_verdict.witness)
    doc["collision"] = pp::to_json(report.collision);
  return doc;
}

int cmd_demo_ccpw(const CommonOptions& common) {
  pp::CcpwDemoOptions options;
  options.seed = common.seed;
  if (std::isfinite(common.grid)) options.mesh = common.grid;
  options.tol_cert = common.tol_cert;
  options.tol_witness = common.tol_witness;
  options.witness_budget.restarts = common.restarts;
  auto report = pp::run_ccpw_demo(options);

  std::fprintf(stderr,
               "family: %s (min defect %.4e); complements: %s (witness "
               "distance to third basis vector %.3e)\n",
               pp::to_string(report.family_verdict.status),
               report.family_verdict.min_defect_found,
               pp::to_string(report.complement_verdict.status),
               report.witness_distance_to_phi3);
  emit(demo_report_json(report, common.seed).dump(2), common.out);

  bool as_expected =
      report.family_verdict.status == pp::VerdictStatus::CertifiedInjective &&
      report.complement_verdict.status == pp::VerdictStatus::WitnessFound;
  return common.strict && !as_expected ? kExitBudget : kExitOk;
}

int cmd_bounds(const std::string& M_range, const std::string& N_range,
               const CommonOptions& common) {
  auto M_values = parse_range(M_range);
  auto N_values = parse_range(N_range);
  json rows = json::array();
  std::printf("%4s %4s %19s %20s %4s\n", "M", "N", "generic_sufficient",
              "obstruction_applies", "v2");
  for (int M : M_values) {
    for (int N : N_values) {
      auto report = pp::obstruction_predicate(M, N);
      std::printf("%4d %4d %19s %20s %4d\n", M, N,
                  report.generic_sufficient ? "true" : "false",
                  report.obstruction_applies ? "true" : "false",
                  report.central_binomial_2adic);
      rows.push_back(pp::to_json(report));
    }
  }
  if (!common.out.empty()) pp::write_text_file(common.out, rows.dump(2));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase retrieval with orthogonal projections: sampling, "
               "injectivity certification, witness search, reconstruction"};
  app.require_subcommand(1);

  CommonOptions common;

  auto* sample = app.add_subcommand("sample", "Sample a random collection");
  int sample_M = 0, sample_N = 0;
  std::vector<int> sample_ranks;
  sample->add_option("-M,--ambient-dim", sample_M, "Ambient dimension")
      ->required();
  sample->add_option("-N,--count", sample_N, "Number of projections")
      ->required();
  sample->add_option("--ranks", sample_ranks, "Comma separated rank profile")
      ->delimiter(',');
  add_common(sample, &common, false);

  auto* check = app.add_subcommand("check", "Decide injectivity of a collection");
  std::string check_path;
  check->add_option("collection", check_path, "Collection JSON file")->required();
  add_common(check, &common, true);

  auto* witness = app.add_subcommand("witness", "Search for a collision witness");
  std::string witness_path;
  witness->add_option("collection", witness_path, "Collection JSON file")
      ->required();
  add_common(witness, &common, true);

  auto* reconstruct =
      app.add_subcommand("reconstruct", "Recover a vector from magnitudes");
  std::string rec_path, rec_measurements, rec_csv;
  std::vector<double> rec_from_x;
  int rec_restarts = 20;
  reconstruct->add_option("collection", rec_path, "Collection JSON file")
      ->required();
  reconstruct->add_option("--measurements", rec_measurements,
                          "Measurement JSON file");
  reconstruct
      ->add_option("--from-x", rec_from_x,
                   "Synthesize measurements from this ground truth")
      ->delimiter(',');
  reconstruct->add_option("--csv", rec_csv, "Append a CSV log row here");
  reconstruct->add_option("--restarts", rec_restarts, "Solver restarts");
  add_common(reconstruct, &common, false);

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over (M, N) cells");
  std::string sweep_config;
  sweep->add_option("config", sweep_config, "Sweep config JSON file")->required();
  add_common(sweep, &common, true);

  auto* demo = app.add_subcommand(
      "demo-ccpw", "Contrast a certifiable family with its complements");
  add_common(demo, &common, true);

  auto* bounds = app.add_subcommand("bounds", "Tabulate (M, N) bound predicates");
  std::string bounds_M = "2:5", bounds_N = "2:10";
  bounds->add_option("-M,--ambient-dim", bounds_M, "M value or lo:hi range");
  bounds->add_option("-N,--count", bounds_N, "N value or lo:hi range");
  add_common(bounds, &common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (sample->parsed())
      return cmd_sample(sample_M, sample_N, sample_ranks, common);
    if (check->parsed()) return cmd_check(check_path, common);
    if (witness->parsed()) return cmd_witness(witness_path, common);
    if (reconstruct->parsed())
      return cmd_reconstruct(rec_path, rec_measurements, rec_from_x,
                             rec_restarts, rec_csv, common);
    if (sweep->parsed()) return cmd_sweep(sweep_config, common);
    if (demo->parsed()) return cmd_demo_ccpw(common);
    if (bounds->parsed()) return cmd_bounds(bounds_M, bounds_N, common);
  } catch (const pp::BudgetExceeded& e) {
    std::fprintf(stderr, "budget exceeded: %s\n", e.what());
    return common.strict ? kExitBudget : kExitOk;
  } catch (const pp::InvalidInput& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitInvalid;
  } catch (const pp::SchemaError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitInvalid;
  } catch (const pp::InvariantError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitInvalid;
  } catch (const pp::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
