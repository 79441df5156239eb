#pragma once

#include <string>

#include <json.hpp>

#include "raceml/classifiers.hpp"
#include "raceml/optimizer.hpp"

namespace raceml {

// Model document, format_version 1. UTF-8 JSON with lexicographically sorted
// keys; reals carry their shortest round-trip decimal form, so the encoding
// is canonical: load followed by save reproduces the file byte for byte.
nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& doc);

// Atomic write (temp file then rename); a failed write leaves nothing behind.
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

nlohmann::json report_to_json(const RunReport& report);
void write_report(const RunReport& report, const std::string& path);

// Overlays a run-config document onto cfg. Recognized keys: seed, rounds,
// population, survivors, fresh, families, metric, feature_search, patience,
// min_delta, mutation{...}, split{...}, search_space{FAMILY: {param: {lo,hi}}}.
// Search-space overrides adjust bounds of continuous/integer params only.
void apply_run_config(OptimizerConfig& cfg, const nlohmann::json& doc);

}  // namespace raceml
