#include "projphase/json_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace projphase {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

const json& require_field(const json& node, const char* key,
                          const std::string& path) {
  if (!node.is_object())
    throw SchemaError(path.empty() ? "/" : path, "expected an object");
  auto it = node.find(key);
  if (it == node.end())
    throw SchemaError(path + "/" + key, "missing required field");
  return *it;
}

int require_int(const json& node, const std::string& path) {
  if (!node.is_number_integer())
    throw SchemaError(path, "expected an integer");
  return node.get<int>();
}

double require_number(const json& node, const std::string& path) {
  if (!node.is_number()) throw SchemaError(path, "expected a number");
  return node.get<double>();
}

std::string require_string(const json& node, const std::string& path) {
  if (!node.is_string()) throw SchemaError(path, "expected a string");
  return node.get<std::string>();
}

Eigen::VectorXd require_vector(const json& node, const std::string& path) {
  if (!node.is_array() || node.empty())
    throw SchemaError(path, "expected a nonempty array of numbers");
  Eigen::VectorXd v(node.size());
  for (std::size_t i = 0; i < node.size(); ++i)
    v[static_cast<int>(i)] =
        require_number(node[i], path + "/" + std::to_string(i));
  return v;
}

}  // namespace

json to_json(const ProjectionCollection& collection) {
  json doc;
  doc["ambient_dim"] = collection.ambient_dim;
  json entries = json::array();
  for (const auto& p : collection.projections) {
    json entry;
    entry["rank"] = p.rank;
    entry["matrix"] = matrix_to_json(p.matrix);
    entries.push_back(std::move(entry));
  }
  doc["projections"] = std::move(entries);
  if (collection.provenance) {
    json prov;
    prov["seed"] = collection.provenance->seed;
    prov["sampler"] = collection.provenance->sampler;
    prov["note"] = collection.provenance->note;
    doc["provenance"] = std::move(prov);
  }
  return doc;
}

ProjectionCollection collection_from_json(const json& doc, double tol_struct) {
  if (!doc.is_object()) throw SchemaError("/", "expected an object");
  ProjectionCollection collection;
  collection.ambient_dim =
      require_int(require_field(doc, "ambient_dim", ""), "/ambient_dim");
  if (collection.ambient_dim < 2)
    throw SchemaError("/ambient_dim", "must be at least 2");
  const int m = collection.ambient_dim;

  const json& entries = require_field(doc, "projections", "");
  if (!entries.is_array() || entries.empty())
    throw SchemaError("/projections", "expected a nonempty array");

  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string base = "/projections/" + std::to_string(i);
    const json& entry = entries[i];
    if (!entry.is_object()) throw SchemaError(base, "expected an object");
    Projection p;
    p.rank = require_int(require_field(entry, "rank", base), base + "/rank");
    if (p.rank < 1 || p.rank > m - 1)
      throw SchemaError(base + "/rank", "must lie in [1, M-1]");
    const json& matrix = require_field(entry, "matrix", base);
    if (!matrix.is_array() || static_cast<int>(matrix.size()) != m)
      throw SchemaError(base + "/matrix", "expected M rows");
    p.matrix.resize(m, m);
    for (int r = 0; r < m; ++r) {
      const std::string row_path =
          base + "/matrix/" + std::to_string(r);
      const json& row = matrix[r];
      if (!row.is_array() || static_cast<int>(row.size()) != m)
        throw SchemaError(row_path, "expected M numbers");
      for (int c = 0; c < m; ++c)
        p.matrix(r, c) =
            require_number(row[c], row_path + "/" + std::to_string(c));
    }
    const auto violated = validate(p, tol_struct);
    if (!violated.empty()) {
      std::ostringstream msg;
      msg << "projection " << i << " violates";
      for (const auto inv : violated) msg << ' ' << to_string(inv);
      throw InvariantError(msg.str());
    }
    collection.projections.push_back(std::move(p));
  }

  if (auto it = doc.find("provenance"); it != doc.end() && !it->is_null()) {
    const json& prov = *it;
    if (!prov.is_object()) throw SchemaError("/provenance", "expected an object");
    Provenance record;
    const json& seed = require_field(prov, "seed", "/provenance");
    if (!seed.is_number_integer() ||
        (!seed.is_number_unsigned() && seed.get<long long>() < 0))
      throw SchemaError("/provenance/seed", "expected a nonnegative integer");
    record.seed = seed.get<std::uint64_t>();
    record.sampler = require_string(require_field(prov, "sampler", "/provenance"),
                                    "/provenance/sampler");
    record.note = require_string(require_field(prov, "note", "/provenance"),
                                 "/provenance/note");
    collection.provenance = std::move(record);
  }
  return collection;
}

void save_collection(const std::string& path,
                     const ProjectionCollection& collection) {
  write_text_file(path, to_json(collection).dump(2) + "\n");
}

ProjectionCollection load_collection(const std::string& path,
                                     double tol_struct) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& err) {
    throw SchemaError("/", std::string("invalid JSON: ") + err.what());
  }
  return collection_from_json(doc, tol_struct);
}

json to_json(const Witness& witness) {
  json doc;
  doc["x"] = vector_to_json(witness.x);
  doc["y"] = vector_to_json(witness.y);
  doc["residual"] = witness.residual;
  return doc;
}

json to_json(const CollisionPair& pair) {
  json doc;
  doc["u"] = vector_to_json(pair.u);
  doc["v"] = vector_to_json(pair.v);
  doc["max_measurement_gap"] = pair.max_measurement_gap;
  return doc;
}

json to_json(const InjectivityVerdict& verdict) {
  json doc;
  doc["status"] = to_string(verdict.status);
  doc["min_defect"] = verdict.min_defect_found;
  doc["witness"] = verdict.witness ? to_json(*verdict.witness) : json(nullptr);
  doc["budget"] = {{"grid_nodes", verdict.budget.grid_nodes},
                   {"mesh", verdict.budget.mesh},
                   {"restarts", verdict.budget.restarts},
                   {"alternations", verdict.budget.alternations}};
  doc["tolerances"] = {{"witness", verdict.tol_witness},
                       {"cert", verdict.tol_cert}};
  return doc;
}

json to_json(const BoundReport& report) {
  json doc;
  doc["ambient_dim"] = report.ambient_dim;
  doc["num_projections"] = report.num_projections;
  doc["generic_sufficient"] = report.generic_sufficient;
  doc["obstruction_applies"] = report.obstruction_applies;
  doc["central_binomial_2adic"] = report.central_binomial_2adic;
  return doc;
}

json measurements_to_json(const MeasurementVector& b) {
  json doc;
  doc["collection_ref"] = b.collection_ref;
  doc["values"] = vector_to_json(b.values);
  return doc;
}

MeasurementVector measurements_from_json(const json& doc,
                                         const ProjectionCollection& collection) {
  if (!doc.is_object()) throw SchemaError("/", "expected an object");
  const Eigen::VectorXd values =
      require_vector(require_field(doc, "values", ""), "/values");
  if (values.size() != collection.count())
    throw SchemaError("/values", "length does not match the collection");
  std::string ref;
  if (auto it = doc.find("collection_ref"); it != doc.end() && !it->is_null())
    ref = require_string(*it, "/collection_ref");
  return make_measurements(values, collection, ref);
}

json to_json(const ReconstructionResult& result) {
  json doc;
  doc["x_hat"] = vector_to_json(result.x_hat);
  doc["residual"] = result.residual;
  doc["restarts_used"] = result.restarts_used;
  doc["converged"] = result.converged;
  doc["iterations"] = result.iterations;
  json alts = json::array();
  for (const auto& alt : result.alternatives) alts.push_back(vector_to_json(alt));
  doc["alternatives"] = std::move(alts);
  return doc;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[64];
  const auto out = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, out.ptr);
}

std::string reconstruction_csv_row(std::uint64_t seed,
                                   const ProjectionCollection& collection,
                                   const ReconstructionResult& result,
                                   double recovery_err) {
  std::ostringstream row;
  row << seed << ',' << collection.ambient_dim << ',' << collection.count()
      << ',';
  const auto ranks = collection.rank_profile();
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (i) row << '-';
    row << ranks[i];
  }
  row << ',' << format_double(result.residual) << ','
      << format_double(recovery_err) << ',' << result.restarts_used << ','
      << (result.converged ? "true" : "false");
  return row.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << contents;
  if (!out.good()) throw Error("failed while writing: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open for reading: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace projphase
