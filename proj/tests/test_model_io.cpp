#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "raceml/model_io.hpp"
#include "raceml/optimizer.hpp"
#include "test_util.hpp"

using namespace raceml;
using testutil::gaussian_blobs;
using testutil::random_dataset;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.is_open());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

TrainedModel train_family(ModelFamily family, const Dataset& ds) {
  HyperparamAssignment params;
  switch (family) {
    case ModelFamily::logreg:
      params = {{"learning_rate", 0.2}, {"l2", 1e-4}, {"iters", std::int64_t{60}}};
      break;
    case ModelFamily::gaussian_nb:
      params = {{"smoothing", 1e-7}};
      break;
    case ModelFamily::knn:
      params = {{"k", std::int64_t{5}}, {"weighting", std::int64_t{1}}};
      break;
    case ModelFamily::tree:
      params = {{"max_depth", std::int64_t{5}}, {"min_leaf", std::int64_t{2}}};
      break;
  }
  FeatureMask mask(ds.n_features(), true);
  mask.set(1, false);  // keep a masked-out column in the picture
  RngStream stream(0);
  return train(family, params, ds, mask, stream);
}

struct TempPath {
  std::string path;
  explicit TempPath(const std::string& name) : path("/tmp/raceml_io_" + name) {}
  ~TempPath() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("save/load preserves predictions exactly for every family") {
  const Dataset ds = gaussian_blobs(30, 3, 3.0, 71);
  for (ModelFamily family : kAllFamilies) {
    const TrainedModel original = train_family(family, ds);
    TempPath file("roundtrip_" + family_name(family) + ".json");
    save_model(original, file.path);
    const TrainedModel loaded = load_model(file.path);

    RngStream stream(13);
    for (int q = 0; q < 100; ++q) {
      std::vector<double> x(ds.n_features());
      for (double& v : x) v = stream.next_gaussian() * 3.0;
      CHECK(predict(original, x) == predict(loaded, x));
    }
  }
}

TEST_CASE("double save is byte-stable") {
  const Dataset ds = gaussian_blobs(25, 2, 3.0, 73);
  for (ModelFamily family : kAllFamilies) {
    const TrainedModel original = train_family(family, ds);
    TempPath first("stable1.json");
    TempPath second("stable2.json");
    save_model(original, first.path);
    save_model(load_model(first.path), second.path);
    CHECK(slurp(first.path) == slurp(second.path));
  }
}

TEST_CASE("saved documents declare format_version 1") {
  const Dataset ds = gaussian_blobs(20, 1, 3.0, 79);
  const TrainedModel model = train_family(ModelFamily::gaussian_nb, ds);
  TempPath file("version.json");
  save_model(model, file.path);
  const nlohmann::json doc = nlohmann::json::parse(slurp(file.path));
  CHECK(doc["format_version"] == 1);
}

TEST_CASE("loading an unsupported version fails") {
  const Dataset ds = gaussian_blobs(20, 1, 3.0, 83);
  const TrainedModel model = train_family(ModelFamily::knn, ds);
  nlohmann::json doc = model_to_json(model);
  doc["format_version"] = 2;
  TempPath file("badversion.json");
  {
    std::ofstream out(file.path);
    out << doc.dump();
  }
  try {
    load_model(file.path);
    FAIL("expected unsupported_version");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unsupported_version);
  }
}

TEST_CASE("loading a document with a missing field names the field") {
  const Dataset ds = gaussian_blobs(20, 1, 3.0, 89);
  const TrainedModel model = train_family(ModelFamily::tree, ds);
  nlohmann::json doc = model_to_json(model);
  doc.erase("mask");
  TempPath file("nomask.json");
  {
    std::ofstream out(file.path);
    out << doc.dump();
  }
  try {
    load_model(file.path);
    FAIL("expected schema_error");
  } catch (const SchemaError& e) {
    CHECK(e.field() == "mask");
  }
}

TEST_CASE("corrupted payloads are rejected at load") {
  const Dataset ds = gaussian_blobs(20, 1, 3.0, 91);

  SUBCASE("tree link outside the node array") {
    nlohmann::json doc = model_to_json(train_family(ModelFamily::tree, ds));
    doc["payload"]["nodes"][0]["left"] = 4096;
    doc["payload"]["nodes"][0]["leaf_class"] = -1;
    doc["payload"]["nodes"][0]["feature"] = 0;
    CHECK_THROWS_AS(model_from_json(doc), SchemaError);
  }
  SUBCASE("knn label outside the class range") {
    nlohmann::json doc = model_to_json(train_family(ModelFamily::knn, ds));
    doc["payload"]["labels"][0] = 9;
    CHECK_THROWS_AS(model_from_json(doc), SchemaError);
  }
  SUBCASE("nb with a non-positive variance") {
    nlohmann::json doc = model_to_json(train_family(ModelFamily::gaussian_nb, ds));
    doc["payload"]["variances"][0][0] = 0.0;
    CHECK_THROWS_AS(model_from_json(doc), SchemaError);
  }
  SUBCASE("hyperparameters outside the family's ranges") {
    nlohmann::json doc = model_to_json(train_family(ModelFamily::knn, ds));
    doc["params"][0]["value"] = 0;  // k must be >= 1
    CHECK_THROWS_AS(model_from_json(doc), SchemaError);
  }
}

TEST_CASE("writes to an unwritable path fail without leaving artifacts") {
  const Dataset ds = gaussian_blobs(20, 1, 3.0, 97);
  const TrainedModel model = train_family(ModelFamily::logreg, ds);
  const std::string path = "/tmp/raceml_no_such_dir/model.json";
  try {
    save_model(model, path);
    FAIL("expected io_error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io_error);
  }
  CHECK_FALSE(std::filesystem::exists(path));
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
}

TEST_CASE("reports serialize deterministically modulo wall time") {
  const Dataset ds = gaussian_blobs(40, 2, 3.0, 101);
  OptimizerConfig cfg;
  cfg.master_seed = 31;
  cfg.split.seed = 31;
  cfg.rounds = 3;
  cfg.population = 4;
  cfg.survivors = 2;
  cfg.fresh_per_round = 1;

  const RunResult first = run(cfg, ds);
  const RunResult second = run(cfg, ds);

  nlohmann::json a = report_to_json(first.report);
  nlohmann::json b = report_to_json(second.report);
  for (auto& round : a["rounds"]) round["wall_time_ms"] = 0.0;
  for (auto& round : b["rounds"]) round["wall_time_ms"] = 0.0;
  CHECK(a.dump() == b.dump());

  // The file mirrors the optimizer invariants.
  TempPath file("report.json");
  write_report(first.report, file.path);
  const nlohmann::json doc = nlohmann::json::parse(slurp(file.path));
  CHECK(doc["rounds"].size() <= static_cast<std::size_t>(cfg.rounds));
  double previous = 0.0;
  for (const auto& round : doc["rounds"]) {
    const double best = round["best_score_so_far"].get<double>();
    CHECK(best >= previous);
    previous = best;
  }
  CHECK(doc["final_test"]["split_name"] == "test");
}

TEST_CASE("run config files overlay defaults") {
  OptimizerConfig cfg;
  const nlohmann::json doc = nlohmann::json::parse(R"({
    "seed": 9,
    "rounds": 7,
    "population": 10,
    "survivors": 3,
    "fresh": 2,
    "families": ["KNN", "TREE"],
    "metric": "macro_f1",
    "feature_search": false,
    "patience": 4,
    "min_delta": 0.01,
    "mutation": {"sigma_cont": 0.3, "p_flip": 0.25},
    "split": {"train": 0.7, "valid": 0.15, "test": 0.15, "stratified": false},
    "search_space": {"KNN": {"k": {"lo": 2, "hi": 9}}}
  })");
  apply_run_config(cfg, doc);

  CHECK(cfg.master_seed == 9);
  CHECK(cfg.split.seed == 9);  // config seed covers the split too
  CHECK(cfg.rounds == 7);
  CHECK(cfg.population == 10);
  CHECK(cfg.survivors == 3);
  CHECK(cfg.fresh_per_round == 2);
  REQUIRE(cfg.families.size() == 2);
  CHECK(cfg.families[0] == ModelFamily::knn);
  CHECK(cfg.families[1] == ModelFamily::tree);
  CHECK(cfg.metric == Metric::macro_f1);
  CHECK(cfg.mutation.p_feature_search == 0.0);
  REQUIRE(cfg.patience.has_value());
  CHECK(*cfg.patience == 4);
  CHECK(cfg.min_delta == 0.01);
  CHECK(cfg.mutation.sigma_cont == 0.3);
  CHECK(cfg.mutation.p_flip == 0.25);
  CHECK(cfg.split.train_fraction == 0.7);
  CHECK_FALSE(cfg.split.stratified);

  const auto& knn_specs = cfg.space.specs_for(ModelFamily::knn);
  const auto& k_range = std::get<IntegerRange>(knn_specs[0].kind);
  CHECK(k_range.lo == 2);
  CHECK(k_range.hi == 9);
  // Untouched families keep their defaults.
  const auto& tree_specs = cfg.space.specs_for(ModelFamily::tree);
  CHECK(std::get<IntegerRange>(tree_specs[0].kind).hi == 12);
}

TEST_CASE("run config rejects bad values") {
  OptimizerConfig cfg;
  CHECK_THROWS_AS(apply_run_config(cfg, nlohmann::json::parse(R"({"rounds": "five"})")),
                  Error);
  CHECK_THROWS_AS(apply_run_config(cfg, nlohmann::json::parse(R"({"families": []})")),
                  Error);
  CHECK_THROWS_AS(
      apply_run_config(cfg, nlohmann::json::parse(
                                R"({"search_space": {"KNN": {"weighting": {"lo": 0}}}})")),
      Error);
  CHECK_THROWS_AS(
      apply_run_config(
          cfg, nlohmann::json::parse(
                   R"({"search_space": {"LOGREG": {"l2": {"lo": 0.5, "hi": 0.1}}}})")),
      Error);
}
