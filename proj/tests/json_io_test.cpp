#include "projphase/json_io.hpp"

#include <gtest/gtest.h>

#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "projphase/errors.hpp"
#include "projphase/injectivity.hpp"
#include "projphase/projection.hpp"
#include "projphase/reconstruction.hpp"
#include "projphase/rng.hpp"
#include "projphase/sharpness.hpp"

namespace pp = projphase;
using nlohmann::json;

namespace {

std::string temp_path(const std::string& stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

TEST(CollectionJson, RoundTripIsBitwise) {
  auto original = pp::sample_collection(4, {1, 3, 2}, 1234, "round trip");
  auto doc = pp::to_json(original);
  auto restored = pp::collection_from_json(json::parse(doc.dump()));
  ASSERT_EQ(restored.ambient_dim, 4);
  ASSERT_EQ(restored.count(), 3);
  EXPECT_EQ(restored.rank_profile(), original.rank_profile());
  for (int i = 0; i < 3; ++i)
    EXPECT_TRUE((restored.projections[i].matrix.array() ==
                 original.projections[i].matrix.array())
                    .all());
  ASSERT_TRUE(restored.provenance.has_value());
  EXPECT_EQ(restored.provenance->seed, 1234u);
  EXPECT_EQ(restored.provenance->note, "round trip");
}

TEST(CollectionJson, FileRoundTrip) {
  auto original = pp::sample_collection(3, {1, 2}, 55);
  auto path = temp_path("projphase_json_io_test_collection.json");
  pp::save_collection(path, original);
  auto restored = pp::load_collection(path);
  for (int i = 0; i < 2; ++i)
    EXPECT_TRUE((restored.projections[i].matrix.array() ==
                 original.projections[i].matrix.array())
                    .all());
  std::remove(path.c_str());
}

TEST(CollectionJson, EmptyCollectionRejected) {
  json doc{{"ambient_dim", 3}, {"projections", json::array()}};
  try {
    pp::collection_from_json(doc);
    FAIL() << "expected SchemaError";
  } catch (const pp::SchemaError& e) {
    EXPECT_EQ(e.path(), "/projections");
  }
}

TEST(CollectionJson, BrokenIdempotencyRejected) {
  auto c = pp::sample_collection(2, {1}, 66);
  auto doc = pp::to_json(c);
  doc["projections"][0]["matrix"][0][0] =
      doc["projections"][0]["matrix"][0][0].get<double>() + 1e-2;
  EXPECT_THROW(pp::collection_from_json(doc), pp::InvariantError);
}

TEST(CollectionJson, SchemaPathsPinpointProblems) {
  auto base = pp::to_json(pp::sample_collection(2, {1}, 67));

  json missing = base;
  missing.erase("ambient_dim");
  try {
    pp::collection_from_json(missing);
    FAIL();
  } catch (const pp::SchemaError& e) {
    EXPECT_EQ(e.path(), "/ambient_dim");
  }

  json bad_rank = base;
  bad_rank["projections"][0]["rank"] = 2;  // rank M is not a proper subspace
  try {
    pp::collection_from_json(bad_rank);
    FAIL();
  } catch (const pp::SchemaError& e) {
    EXPECT_EQ(e.path(), "/projections/0/rank");
  }

  json ragged = base;
  ragged["projections"][0]["matrix"][1] = json::array({0.0});
  try {
    pp::collection_from_json(ragged);
    FAIL();
  } catch (const pp::SchemaError& e) {
    EXPECT_NE(e.path().find("/projections/0/matrix"), std::string::npos);
  }

  json bad_seed = base;
  bad_seed["provenance"]["seed"] = -1;
  try {
    pp::collection_from_json(bad_seed);
    FAIL();
  } catch (const pp::SchemaError& e) {
    EXPECT_EQ(e.path(), "/provenance/seed");
  }
}

TEST(CollectionJson, GarbageTextRejected) {
  auto path = temp_path("projphase_json_io_test_garbage.json");
  pp::write_text_file(path, "not json at all {{{");
  EXPECT_THROW(pp::load_collection(path), pp::SchemaError);
  std::remove(path.c_str());
}

TEST(WitnessJson, CarriesVectorsAndResidual) {
  pp::Witness w;
  w.x = Eigen::Vector2d(1, 0);
  w.y = Eigen::Vector2d(0, -1);
  w.residual = 2.5e-12;
  auto doc = pp::to_json(w);
  EXPECT_EQ(doc["x"].size(), 2u);
  EXPECT_EQ(doc["y"][1].get<double>(), -1.0);
  EXPECT_EQ(doc["residual"].get<double>(), 2.5e-12);
}

TEST(VerdictJson, WitnessAndNullForms) {
  auto c = pp::sample_collection(3, {1, 2, 2, 1}, 68);
  pp::CertifyOptions options;
  options.witness_budget.seed = 69;
  auto verdict = pp::certify_injective(c, options);
  auto doc = pp::to_json(verdict);
  EXPECT_EQ(doc["status"].get<std::string>(), "WitnessFound");
  EXPECT_FALSE(doc["witness"].is_null());
  EXPECT_TRUE(doc["budget"].contains("grid_nodes"));
  EXPECT_TRUE(doc["tolerances"].contains("witness"));

  pp::InjectivityVerdict bare;
  bare.status = pp::VerdictStatus::Inconclusive;
  EXPECT_TRUE(pp::to_json(bare)["witness"].is_null());
}

TEST(BoundReportJson, FieldsSurvive) {
  auto doc = pp::to_json(pp::obstruction_predicate(5, 8));
  EXPECT_EQ(doc["ambient_dim"].get<int>(), 5);
  EXPECT_EQ(doc["num_projections"].get<int>(), 8);
  EXPECT_TRUE(doc["obstruction_applies"].get<bool>());
  EXPECT_FALSE(doc["generic_sufficient"].get<bool>());
  EXPECT_EQ(doc["central_binomial_2adic"].get<int>(), 1);
}

TEST(MeasurementsJson, RoundTripAndValidation) {
  auto c = pp::sample_collection(3, {1, 2}, 70);
  pp::RngStream rng(71);
  auto b = pp::make_measurements(pp::measurement_map(c, rng.gaussian_vector(3)),
                                 c, "collection-70");
  auto doc = pp::measurements_to_json(b);
  auto restored = pp::measurements_from_json(doc, c);
  EXPECT_TRUE((restored.values.array() == b.values.array()).all());
  EXPECT_EQ(restored.collection_ref, "collection-70");

  doc["values"].push_back(1.0);
  EXPECT_THROW(pp::measurements_from_json(doc, c), pp::SchemaError);
}

TEST(ReconstructionJson, ResultShape) {
  auto c = pp::sample_collection(3, {2, 2, 1, 2, 2}, 72);
  pp::RngStream rng(73);
  Eigen::VectorXd x = rng.gaussian_vector(3);
  auto b = pp::make_measurements(pp::measurement_map(c, x), c);
  pp::ReconstructionBudget budget;
  budget.seed = 74;
  auto result = pp::reconstruct(c, b, budget);
  auto doc = pp::to_json(result);
  EXPECT_EQ(doc["x_hat"].size(), 3u);
  EXPECT_TRUE(doc["converged"].get<bool>());
  EXPECT_TRUE(doc.contains("residual"));
  EXPECT_TRUE(doc.contains("restarts_used"));
  EXPECT_TRUE(doc["alternatives"].is_array());
}

TEST(FormatDouble, RoundTripsAndNames) {
  // strtod, not std::stod: the latter throws out_of_range on subnormals.
  for (double v : {0.1, -2.5e-300, 3.14159, 1.0 / 3.0, 6.02e23, -0.0, 1e-323}) {
    std::string text = pp::format_double(v);
    EXPECT_EQ(std::strtod(text.c_str(), nullptr), v) << text;
  }
  EXPECT_EQ(pp::format_double(std::nan("")), "nan");
}

TEST(CsvRow, FixedColumnOrder) {
  auto c = pp::sample_collection(3, {1, 2, 2}, 75);
  pp::ReconstructionResult result;
  result.x_hat = Eigen::Vector3d(1, 0, 0);
  result.residual = 0.5;
  result.restarts_used = 7;
  result.converged = false;
  std::string row = pp::reconstruction_csv_row(9, c, result, 0.25);
  EXPECT_EQ(row, "9,3,3,1-2-2,0.5,0.25,7,false");
}

TEST(TextFiles, RoundTrip) {
  auto path = temp_path("projphase_json_io_test_text.txt");
  pp::write_text_file(path, "line\nline2");
  EXPECT_EQ(pp::read_text_file(path), "line\nline2");
  std::remove(path.c_str());
  EXPECT_THROW(pp::read_text_file(path), pp::Error);
}

}  // namespace
