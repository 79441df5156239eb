#include "raceml/model_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace raceml {

using nlohmann::json;

namespace {

json params_to_json(const HyperparamAssignment& params) {
  json out = json::array();
  for (const auto& setting : params) {
    json entry;
    entry["name"] = setting.name;
    if (const double* d = std::get_if<double>(&setting.value))
      entry["value"] = *d;
    else
      entry["value"] = std::get<std::int64_t>(setting.value);
    out.push_back(entry);
  }
  return out;
}

HyperparamAssignment params_from_json(const json& doc) {
  if (!doc.is_array()) throw SchemaError("params");
  HyperparamAssignment params;
  for (const auto& entry : doc) {
    if (!entry.is_object() || !entry.contains("name") || !entry.contains("value") ||
        !entry["name"].is_string() || !entry["value"].is_number())
      throw SchemaError("params");
    ParamSetting setting;
    setting.name = entry["name"].get<std::string>();
    if (entry["value"].is_number_integer())
      setting.value = entry["value"].get<std::int64_t>();
    else
      setting.value = entry["value"].get<double>();
    params.push_back(std::move(setting));
  }
  return params;
}

json mask_to_json(const FeatureMask& mask) {
  json out = json::array();
  for (std::size_t i = 0; i < mask.size(); ++i) out.push_back(mask.test(i) ? 1 : 0);
  return out;
}

FeatureMask mask_from_json(const json& doc) {
  if (!doc.is_array() || doc.empty()) throw SchemaError("mask");
  std::vector<std::uint8_t> bits;
  bits.reserve(doc.size());
  for (const auto& bit : doc) {
    if (!bit.is_number_integer()) throw SchemaError("mask");
    const auto value = bit.get<int>();
    if (value != 0 && value != 1) throw SchemaError("mask");
    bits.push_back(static_cast<std::uint8_t>(value));
  }
  FeatureMask mask(std::move(bits));
  if (mask.popcount() == 0) throw SchemaError("mask");
  return mask;
}

template <typename T>
json vector_to_json(const std::vector<T>& values) {
  return json(values);
}

std::vector<double> doubles_from_json(const json& doc, const char* field) {
  if (!doc.is_array()) throw SchemaError(field);
  std::vector<double> out;
  out.reserve(doc.size());
  for (const auto& v : doc) {
    if (!v.is_number()) throw SchemaError(field);
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::vector<double>> matrix_from_json(const json& doc, const char* field) {
  if (!doc.is_array()) throw SchemaError(field);
  std::vector<std::vector<double>> out;
  out.reserve(doc.size());
  for (const auto& row : doc) out.push_back(doubles_from_json(row, field));
  return out;
}

std::vector<std::string> strings_from_json(const json& doc, const char* field) {
  if (!doc.is_array()) throw SchemaError(field);
  std::vector<std::string> out;
  out.reserve(doc.size());
  for (const auto& v : doc) {
    if (!v.is_string()) throw SchemaError(field);
    out.push_back(v.get<std::string>());
  }
  return out;
}

json payload_to_json(const TrainedModel& model) {
  json payload;
  switch (model.family) {
    case ModelFamily::logreg: {
      const auto& coeffs = std::get<LogregPayload>(model.fitted).coeffs;
      json weights = json::array();
      for (std::size_t c = 0; c < coeffs.n_classes; ++c) {
        json row = json::array();
        for (std::size_t j = 0; j < coeffs.n_features; ++j) row.push_back(coeffs.weight(c, j));
        weights.push_back(std::move(row));
      }
      payload["weights"] = std::move(weights);
      payload["biases"] = vector_to_json(coeffs.biases);
      break;
    }
    case ModelFamily::gaussian_nb: {
      const auto& nb = std::get<GaussianNbPayload>(model.fitted);
      payload["priors"] = vector_to_json(nb.priors);
      payload["means"] = json(nb.means);
      payload["variances"] = json(nb.variances);
      break;
    }
    case ModelFamily::knn: {
      const auto& knn = std::get<KnnPayload>(model.fitted);
      payload["rows"] = json(knn.rows);
      payload["labels"] = vector_to_json(knn.labels);
      break;
    }
    case ModelFamily::tree: {
      const auto& tree = std::get<TreePayload>(model.fitted);
      json nodes = json::array();
      for (const auto& node : tree.nodes) {
        json entry;
        entry["feature"] = node.feature;
        entry["threshold"] = node.threshold;
        entry["left"] = node.left;
        entry["right"] = node.right;
        entry["leaf_class"] = node.leaf_class;
        nodes.push_back(std::move(entry));
      }
      payload["nodes"] = std::move(nodes);
      break;
    }
  }
  return payload;
}

FittedPayload payload_from_json(ModelFamily family, const json& doc) {
  if (!doc.is_object()) throw SchemaError("payload");
  switch (family) {
    case ModelFamily::logreg: {
      if (!doc.contains("weights") || !doc.contains("biases")) throw SchemaError("payload");
      const auto weights = matrix_from_json(doc["weights"], "payload.weights");
      LinearCoeffs coeffs;
      coeffs.biases = doubles_from_json(doc["biases"], "payload.biases");
      coeffs.n_classes = weights.size();
      coeffs.n_features = weights.empty() ? 0 : weights.front().size();
      for (const auto& row : weights) {
        if (row.size() != coeffs.n_features) throw SchemaError("payload.weights");
        coeffs.weights.insert(coeffs.weights.end(), row.begin(), row.end());
      }
      if (coeffs.biases.size() != coeffs.n_classes) throw SchemaError("payload.biases");
      return LogregPayload{std::move(coeffs)};
    }
    case ModelFamily::gaussian_nb: {
      if (!doc.contains("priors") || !doc.contains("means") || !doc.contains("variances"))
        throw SchemaError("payload");
      GaussianNbPayload nb;
      nb.priors = doubles_from_json(doc["priors"], "payload.priors");
      nb.means = matrix_from_json(doc["means"], "payload.means");
      nb.variances = matrix_from_json(doc["variances"], "payload.variances");
      if (nb.means.size() != nb.priors.size() || nb.variances.size() != nb.priors.size())
        throw SchemaError("payload");
      return nb;
    }
    case ModelFamily::knn: {
      if (!doc.contains("rows") || !doc.contains("labels")) throw SchemaError("payload");
      KnnPayload knn;
      knn.rows = matrix_from_json(doc["rows"], "payload.rows");
      if (!doc["labels"].is_array()) throw SchemaError("payload.labels");
      for (const auto& label : doc["labels"]) {
        if (!label.is_number_integer()) throw SchemaError("payload.labels");
        knn.labels.push_back(label.get<int>());
      }
      if (knn.labels.size() != knn.rows.size()) throw SchemaError("payload.labels");
      return knn;
    }
    case ModelFamily::tree: {
      if (!doc.contains("nodes") || !doc["nodes"].is_array() || doc["nodes"].empty())
        throw SchemaError("payload.nodes");
      TreePayload tree;
      for (const auto& entry : doc["nodes"]) {
        for (const char* key : {"feature", "threshold", "left", "right", "leaf_class"})
          if (!entry.contains(key)) throw SchemaError("payload.nodes");
        TreeNode node;
        node.feature = entry["feature"].get<int>();
        node.threshold = entry["threshold"].get<double>();
        node.left = entry["left"].get<int>();
        node.right = entry["right"].get<int>();
        node.leaf_class = entry["leaf_class"].get<int>();
        tree.nodes.push_back(node);
      }
      return tree;
    }
  }
  throw SchemaError("family");
}

// Structural consistency of a reconstructed model: payload arities must match
// the mask and class count, and tree links must stay inside the node array.
void check_payload_shape(const TrainedModel& model) {
  const std::size_t d = model.mask.popcount();
  const auto n_classes = static_cast<std::size_t>(model.n_classes);
  const auto ok = [](bool condition) {
    if (!condition) throw SchemaError("payload");
  };
  switch (model.family) {
    case ModelFamily::logreg: {
      const auto& coeffs = std::get<LogregPayload>(model.fitted).coeffs;
      ok(coeffs.n_classes == n_classes && coeffs.n_features == d);
      break;
    }
    case ModelFamily::gaussian_nb: {
      const auto& nb = std::get<GaussianNbPayload>(model.fitted);
      ok(nb.priors.size() == n_classes);
      for (std::size_t c = 0; c < n_classes; ++c) {
        ok(nb.means[c].size() == d && nb.variances[c].size() == d);
        for (double v : nb.variances[c]) ok(v > 0.0);
      }
      break;
    }
    case ModelFamily::knn: {
      const auto& knn = std::get<KnnPayload>(model.fitted);
      ok(!knn.rows.empty());
      for (const auto& row : knn.rows) ok(row.size() == d);
      for (int label : knn.labels)
        ok(label >= 0 && static_cast<std::size_t>(label) < n_classes);
      break;
    }
    case ModelFamily::tree: {
      const auto& nodes = std::get<TreePayload>(model.fitted).nodes;
      const auto size = static_cast<int>(nodes.size());
      for (const auto& node : nodes) {
        if (node.is_leaf()) {
          ok(node.leaf_class < static_cast<int>(n_classes));
        } else {
          ok(node.feature >= 0 && static_cast<std::size_t>(node.feature) < d);
          ok(node.left >= 0 && node.left < size && node.right >= 0 && node.right < size);
        }
      }
      break;
    }
  }
}

// Serialize with sorted keys, 2-space indent, trailing newline; written to a
// sibling temp file first so failures cannot leave a partial document.
void write_text_atomically(const std::string& text, const std::string& path) {
  const std::string tmp_path = path + ".tmp";
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out.is_open()) throw Error(Errc::io_error, "cannot write '" + path + "'");
    out << text;
    out.flush();
    if (!out.good()) {
      out.close();
      std::remove(tmp_path.c_str());
      throw Error(Errc::io_error, "failed while writing '" + path + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp_path, path, ec);
  if (ec) {
    std::remove(tmp_path.c_str());
    throw Error(Errc::io_error, "cannot move temp file onto '" + path + "'");
  }
}

json candidate_to_json(const CandidateSpec& candidate) {
  json out;
  out["id"] = candidate.id;
  out["family"] = family_name(candidate.family);
  out["params"] = params_to_json(candidate.params);
  out["mask"] = mask_to_json(candidate.mask);
  if (candidate.parent_id)
    out["parent_id"] = *candidate.parent_id;
  else
    out["parent_id"] = nullptr;
  return out;
}

json record_to_json(const EvaluationRecord& record) {
  json out;
  out["candidate_id"] = record.candidate_id;
  out["split_name"] = record.split_name;
  out["metric"] = metric_name(record.metric);
  out["score"] = record.score;
  out["n_examples"] = record.n_examples;
  return out;
}

json param_spec_to_json(const ParamSpec& spec) {
  json out;
  out["name"] = spec.name;
  std::visit(
      [&](const auto& kind) {
        using Kind = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<Kind, ContinuousLinear>) {
          out["kind"] = "linear";
          out["lo"] = kind.lo;
          out["hi"] = kind.hi;
        } else if constexpr (std::is_same_v<Kind, ContinuousLog>) {
          out["kind"] = "log";
          out["lo"] = kind.lo;
          out["hi"] = kind.hi;
        } else if constexpr (std::is_same_v<Kind, IntegerRange>) {
          out["kind"] = "int";
          out["lo"] = kind.lo;
          out["hi"] = kind.hi;
        } else {
          out["kind"] = "categorical";
          out["options"] = kind.options;
        }
      },
      spec.kind);
  return out;
}

json config_to_json(const OptimizerConfig& cfg) {
  json families = json::array();
  for (ModelFamily family : cfg.families) families.push_back(family_name(family));

  json mutation;
  mutation["sigma_cont"] = cfg.mutation.sigma_cont;
  mutation["p_cat"] = cfg.mutation.p_cat;
  mutation["p_flip"] = cfg.mutation.p_flip;
  mutation["p_feature_search"] = cfg.mutation.p_feature_search;

  json split;
  split["train_fraction"] = cfg.split.train_fraction;
  split["valid_fraction"] = cfg.split.valid_fraction;
  split["test_fraction"] = cfg.split.test_fraction;
  split["seed"] = cfg.split.seed;
  split["stratified"] = cfg.split.stratified;

  json space;
  for (const auto& [family, specs] : cfg.space.all()) {
    json list = json::array();
    for (const auto& spec : specs) list.push_back(param_spec_to_json(spec));
    space[family_name(family)] = std::move(list);
  }

  json out;
  out["master_seed"] = cfg.master_seed;
  out["rounds"] = cfg.rounds;
  out["population"] = cfg.population;
  out["survivors"] = cfg.survivors;
  out["fresh_per_round"] = cfg.fresh_per_round;
  out["families"] = std::move(families);
  out["metric"] = metric_name(cfg.metric);
  out["mutation"] = std::move(mutation);
  out["split"] = std::move(split);
  if (cfg.patience)
    out["patience"] = *cfg.patience;
  else
    out["patience"] = nullptr;
  out["min_delta"] = cfg.min_delta;
  out["search_space"] = std::move(space);
  return out;
}

}  // namespace

json model_to_json(const TrainedModel& model) {
  json doc;
  doc["format_version"] = 1;
  doc["family"] = family_name(model.family);
  doc["params"] = params_to_json(model.params);
  doc["mask"] = mask_to_json(model.mask);
  doc["feature_names"] = model.feature_names;
  doc["class_names"] = model.class_names;
  json scaler;
  scaler["mean"] = vector_to_json(model.scaler.mean);
  scaler["stddev"] = vector_to_json(model.scaler.stddev);
  doc["scaler"] = std::move(scaler);
  doc["payload"] = payload_to_json(model);
  return doc;
}

TrainedModel model_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("format_version") ||
      !doc["format_version"].is_number_integer())
    throw SchemaError("format_version");
  if (doc["format_version"].get<int>() != 1)
    throw Error(Errc::unsupported_version,
                "unsupported model format_version " + doc["format_version"].dump());

  for (const char* key :
       {"family", "params", "mask", "feature_names", "class_names", "scaler", "payload"})
    if (!doc.contains(key)) throw SchemaError(key);

  TrainedModel model;
  if (!doc["family"].is_string()) throw SchemaError("family");
  try {
    model.family = family_from_name(doc["family"].get<std::string>());
  } catch (const Error&) {
    throw SchemaError("family");
  }
  model.params = params_from_json(doc["params"]);
  model.mask = mask_from_json(doc["mask"]);
  model.feature_names = strings_from_json(doc["feature_names"], "feature_names");
  model.class_names = strings_from_json(doc["class_names"], "class_names");

  if (!doc["scaler"].is_object() || !doc["scaler"].contains("mean") ||
      !doc["scaler"].contains("stddev"))
    throw SchemaError("scaler");
  model.scaler.mean = doubles_from_json(doc["scaler"]["mean"], "scaler.mean");
  model.scaler.stddev = doubles_from_json(doc["scaler"]["stddev"], "scaler.stddev");
  if (model.scaler.mean.size() != model.scaler.stddev.size() ||
      model.scaler.size() != model.mask.popcount())
    throw SchemaError("scaler");

  if (model.mask.size() != model.feature_names.size()) throw SchemaError("mask");
  if (model.class_names.size() < 2) throw SchemaError("class_names");
  model.n_classes = static_cast<int>(model.class_names.size());
  model.fitted = payload_from_json(model.family, doc["payload"]);
  check_payload_shape(model);
  try {
    validate_params(model.family, model.params);
  } catch (const Error&) {
    throw SchemaError("params");
  }
  return model;
}

void save_model(const TrainedModel& model, const std::string& path) {
  write_text_atomically(model_to_json(model).dump(2) + "\n", path);
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) throw Error(Errc::io_error, "cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::schema_error, "'" + path + "' is not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

json report_to_json(const RunReport& report) {
  json rounds = json::array();
  for (const auto& generation : report.rounds) {
    json entry;
    entry["round"] = generation.round;
    json records = json::array();
    for (const auto& record : generation.records) records.push_back(record_to_json(record));
    entry["records"] = std::move(records);
    entry["survivors"] = generation.survivors;
    entry["best_score_so_far"] = generation.best_score_so_far;
    entry["wall_time_ms"] = generation.wall_time_ms;
    rounds.push_back(std::move(entry));
  }

  json winner = candidate_to_json(report.winner);
  winner["validation_score"] = report.winner_validation_score;

  json doc;
  doc["config"] = config_to_json(report.config);
  doc["rounds"] = std::move(rounds);
  doc["winner"] = std::move(winner);
  doc["final_test"] = record_to_json(report.final_test);
  doc["warnings"] = report.warnings;
  return doc;
}

void write_report(const RunReport& report, const std::string& path) {
  write_text_atomically(report_to_json(report).dump(2) + "\n", path);
}

void apply_run_config(OptimizerConfig& cfg, const json& doc) {
  if (!doc.is_object())
    throw Error(Errc::infeasible_config, "run config must be a JSON object");

  const auto get_int = [&](const char* key, auto& target) {
    if (doc.contains(key)) {
      if (!doc[key].is_number_integer())
        throw Error(Errc::infeasible_config, std::string("config '") + key + "' must be an integer");
      target = doc[key].get<std::decay_t<decltype(target)>>();
    }
  };

  get_int("seed", cfg.master_seed);
  if (doc.contains("seed")) cfg.split.seed = cfg.master_seed;  // split{} below may re-override
  get_int("rounds", cfg.rounds);
  get_int("population", cfg.population);
  get_int("survivors", cfg.survivors);
  get_int("fresh", cfg.fresh_per_round);

  if (doc.contains("families")) {
    if (!doc["families"].is_array() || doc["families"].empty())
      throw Error(Errc::infeasible_config, "config 'families' must be a non-empty array");
    cfg.families.clear();
    for (const auto& name : doc["families"])
      cfg.families.push_back(family_from_name(name.get<std::string>()));
  }
  if (doc.contains("metric")) cfg.metric = metric_from_name(doc["metric"].get<std::string>());
  if (doc.contains("feature_search")) {
    if (!doc["feature_search"].is_boolean())
      throw Error(Errc::infeasible_config, "config 'feature_search' must be a boolean");
    if (!doc["feature_search"].get<bool>()) cfg.mutation.p_feature_search = 0.0;
  }
  if (doc.contains("patience")) {
    int patience = 0;
    get_int("patience", patience);
    cfg.patience = patience;
  }
  if (doc.contains("min_delta")) cfg.min_delta = doc["min_delta"].get<double>();

  if (doc.contains("mutation")) {
    const json& m = doc["mutation"];
    if (m.contains("sigma_cont")) cfg.mutation.sigma_cont = m["sigma_cont"].get<double>();
    if (m.contains("p_cat")) cfg.mutation.p_cat = m["p_cat"].get<double>();
    if (m.contains("p_flip")) cfg.mutation.p_flip = m["p_flip"].get<double>();
    if (m.contains("p_feature_search"))
      cfg.mutation.p_feature_search = m["p_feature_search"].get<double>();
  }
  if (doc.contains("split")) {
    const json& s = doc["split"];
    if (s.contains("train")) cfg.split.train_fraction = s["train"].get<double>();
    if (s.contains("valid")) cfg.split.valid_fraction = s["valid"].get<double>();
    if (s.contains("test")) cfg.split.test_fraction = s["test"].get<double>();
    if (s.contains("seed")) cfg.split.seed = s["seed"].get<std::uint64_t>();
    if (s.contains("stratified")) cfg.split.stratified = s["stratified"].get<bool>();
  }

  if (doc.contains("search_space")) {
    const json& space_doc = doc["search_space"];
    if (!space_doc.is_object())
      throw Error(Errc::infeasible_config, "config 'search_space' must be an object");
    for (const auto& [family_key, overrides] : space_doc.items()) {
      const ModelFamily family = family_from_name(family_key);
      std::vector<ParamSpec> specs = cfg.space.specs_for(family);
      for (auto& spec : specs) {
        if (!overrides.contains(spec.name)) continue;
        const json& bounds = overrides[spec.name];
        std::visit(
            [&](auto& kind) {
              using Kind = std::decay_t<decltype(kind)>;
              if constexpr (std::is_same_v<Kind, Categorical>) {
                throw Error(Errc::infeasible_config,
                            "categorical param '" + spec.name + "' bounds cannot be overridden");
              } else if constexpr (std::is_same_v<Kind, IntegerRange>) {
                if (bounds.contains("lo")) kind.lo = bounds["lo"].get<std::int64_t>();
                if (bounds.contains("hi")) kind.hi = bounds["hi"].get<std::int64_t>();
                if (kind.lo >= kind.hi)
                  throw Error(Errc::infeasible_config, "bounds for '" + spec.name + "' are empty");
              } else {
                if (bounds.contains("lo")) kind.lo = bounds["lo"].get<double>();
                if (bounds.contains("hi")) kind.hi = bounds["hi"].get<double>();
                if (!(kind.lo < kind.hi))
                  throw Error(Errc::infeasible_config, "bounds for '" + spec.name + "' are empty");
                if constexpr (std::is_same_v<Kind, ContinuousLog>)
                  if (!(kind.lo > 0))
                    throw Error(Errc::infeasible_config,
                                "log-scale param '" + spec.name + "' needs lo > 0");
              }
            },
            spec.kind);
      }
      cfg.space.set(family, std::move(specs));
    }
  }
}

}  // namespace raceml
