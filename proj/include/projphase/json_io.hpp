#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "projphase/injectivity.hpp"
#include "projphase/projection.hpp"
#include "projphase/reconstruction.hpp"
#include "projphase/sharpness.hpp"

namespace projphase {

// Collection document:
// { "ambient_dim": M,
//   "projections": [ { "rank": k, "matrix": [[...], ...] } ],
//   "provenance": { "seed": u64, "sampler": str, "note": str } }
// Matrices are row-major arrays of arrays; numbers survive a round trip
// bitwise (shortest-representation doubles).
nlohmann::json to_json(const ProjectionCollection& collection);

// Throws SchemaError with a JSON-pointer-ish path for shape problems and
// InvariantError when a parsed matrix fails validation at tol_struct.
ProjectionCollection collection_from_json(
    const nlohmann::json& doc,
    double tol_struct = kDefaultTolerances.structural);

void save_collection(const std::string& path,
                     const ProjectionCollection& collection);
ProjectionCollection load_collection(
    const std::string& path,
    double tol_struct = kDefaultTolerances.structural);

nlohmann::json to_json(const Witness& witness);
nlohmann::json to_json(const CollisionPair& pair);
nlohmann::json to_json(const InjectivityVerdict& verdict);
nlohmann::json to_json(const BoundReport& report);

nlohmann::json measurements_to_json(const MeasurementVector& b);
MeasurementVector measurements_from_json(const nlohmann::json& doc,
                                         const ProjectionCollection& collection);

nlohmann::json to_json(const ReconstructionResult& result);

// Fixed-order CSV row for sweep and reconstruction logs:
// seed,M,N,rank_profile,residual,recovery_error,restarts_used,converged
// rank_profile is dash-joined; recovery_error may be NaN when no ground
// truth is known.
std::string reconstruction_csv_row(std::uint64_t seed,
                                   const ProjectionCollection& collection,
                                   const ReconstructionResult& result,
                                   double recovery_err);

// Full-precision double formatting shared by CSV writers.
std::string format_double(double value);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace projphase
