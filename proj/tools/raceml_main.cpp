// raceml: race a portfolio of classifiers over hyperparameters and feature
// subsets, keep the best model, and audit every round.
//
//   raceml optimize --data train.csv --label species --out model.json --report report.json
//   raceml predict  --model model.json --data new.csv --out predictions.csv
//   raceml inspect  --model model.json
//
// Exit codes: 0 ok, 1 usage error, 2 data error, 3 internal error.

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "raceml/dataset.hpp"
#include "raceml/model_io.hpp"
#include "raceml/optimizer.hpp"

namespace {

using raceml::Errc;
using raceml::Error;

struct OptimizeArgs {
  std::string data_path;
  std::string label_column;
  std::uint64_t seed = 0;
  int rounds = 5;
  int population = 16;
  int survivors = 4;
  int fresh = 4;
  std::string families;
  std::string metric;
  std::string feature_search;
  int patience = 0;
  double min_delta = 0.0;
  std::string config_path;
  std::string out_path = "model.json";
  std::string report_path = "report.json";
  unsigned threads = 0;
};

std::vector<raceml::ModelFamily> parse_families(const std::string& list) {
  std::vector<raceml::ModelFamily> families;
  std::stringstream stream(list);
  std::string token;
  while (std::getline(stream, token, ','))
    if (!token.empty()) families.push_back(raceml::family_from_name(token));
  if (families.empty())
    throw Error(Errc::infeasible_config, "--families needs at least one family");
  return families;
}

int run_optimize(const CLI::App& cmd, const OptimizeArgs& args) {
  raceml::OptimizerConfig cfg;
  cfg.master_seed = args.seed;
  cfg.split.seed = args.seed;

  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in.is_open())
      throw Error(Errc::missing_file, "cannot open config '" + args.config_path + "'");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::infeasible_config,
                  "config '" + args.config_path + "' is not valid JSON: " + e.what());
    }
    raceml::apply_run_config(cfg, doc);
  }

  // Explicit flags win over config-file values.
  if (cmd.count("--seed") != 0) {
    cfg.master_seed = args.seed;
    cfg.split.seed = args.seed;
  }
  if (cmd.count("--rounds") != 0) cfg.rounds = args.rounds;
  if (cmd.count("--population") != 0) cfg.population = args.population;
  if (cmd.count("--survivors") != 0) cfg.survivors = args.survivors;
  if (cmd.count("--fresh") != 0) cfg.fresh_per_round = args.fresh;
  if (cmd.count("--families") != 0) cfg.families = parse_families(args.families);
  if (cmd.count("--metric") != 0) cfg.metric = raceml::metric_from_name(args.metric);
  if (cmd.count("--feature-search") != 0 && args.feature_search == "off")
    cfg.mutation.p_feature_search = 0.0;
  if (cmd.count("--patience") != 0) cfg.patience = args.patience;
  if (cmd.count("--min-delta") != 0) cfg.min_delta = args.min_delta;

  const raceml::Dataset ds = raceml::load_csv(args.data_path, args.label_column);
  const raceml::RunResult result = raceml::run(cfg, ds, args.threads);

  raceml::save_model(result.model, args.out_path);
  raceml::write_report(result.report, args.report_path);

  for (const auto& warning : result.report.warnings)
    std::cerr << "warning: " << warning << "\n";
  for (const auto& generation : result.report.rounds) {
    double best_score = 0.0;
    for (const auto& record : generation.records)
      if (record.candidate_id == generation.survivors.front()) best_score = record.score;
    std::cout << "round " << generation.round << ": best_" << metric_name(cfg.metric) << "="
              << best_score << " (candidate " << generation.survivors.front()
              << "), best_so_far=" << generation.best_score_so_far << "\n";
  }
  std::cout << "winner: candidate " << result.report.winner.id << " family "
            << family_name(result.report.winner.family)
            << " valid=" << result.report.winner_validation_score
            << " test=" << result.report.final_test.score << "\n";
  std::cout << "model written to " << args.out_path << ", report to " << args.report_path
            << "\n";
  return 0;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path, const std::string& label_column) {
  const raceml::TrainedModel model = raceml::load_model(model_path);
  const raceml::CsvTable table = raceml::read_csv_table(data_path);

  // Map every model feature to an input column by name.
  std::vector<std::size_t> feature_cols;
  for (const auto& name : model.feature_names) {
    bool found = false;
    for (std::size_t c = 0; c < table.header.size(); ++c)
      if (table.header[c] == name) {
        feature_cols.push_back(c);
        found = true;
        break;
      }
    if (!found)
      throw Error(Errc::column_mismatch, "input is missing feature column '" + name + "'");
  }

  std::size_t label_col = table.header.size();
  if (!label_column.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c)
      if (table.header[c] == label_column) label_col = c;
    if (label_col == table.header.size())
      throw Error(Errc::missing_column, "label column '" + label_column + "' not found");
  }

  std::vector<int> preds;
  std::vector<int> labels;
  preds.reserve(table.rows.size());
  std::vector<double> x(model.feature_names.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      const std::string& cell = table.rows[r][feature_cols[j]];
      const char* begin = cell.data();
      auto [ptr, ec] = std::from_chars(begin, begin + cell.size(), x[j]);
      if (ec != std::errc{} || ptr != begin + cell.size())
        throw raceml::CsvParseError(r + 1, feature_cols[j] + 1,
                                    "row " + std::to_string(r + 1) + ": cannot parse '" +
                                        cell + "'");
    }
    preds.push_back(raceml::predict(model, x));

    if (label_col < table.header.size()) {
      const std::string& value = table.rows[r][label_col];
      int code = -1;
      for (std::size_t c = 0; c < model.class_names.size(); ++c)
        if (model.class_names[c] == value) code = static_cast<int>(c);
      if (code < 0)
        throw Error(Errc::column_mismatch,
                    "label value '" + value + "' is not among the model's classes");
      labels.push_back(code);
    }
  }

  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out.is_open()) throw Error(Errc::io_error, "cannot write '" + out_path + "'");
  out << "prediction\n";
  for (int p : preds) out << model.class_names[static_cast<std::size_t>(p)] << "\n";
  out.flush();
  if (!out.good()) throw Error(Errc::io_error, "failed while writing '" + out_path + "'");

  if (!labels.empty()) {
    const raceml::ConfusionMatrix cm =
        raceml::confusion(preds, labels, static_cast<std::size_t>(model.n_classes));
    std::cout << "accuracy " << raceml::accuracy(cm) << "\n";
  }
  std::cout << "predictions written to " << out_path << "\n";
  return 0;
}

int run_inspect(const std::string& model_path) {
  const raceml::TrainedModel model = raceml::load_model(model_path);
  std::cout << "family: " << family_name(model.family) << "\n";

  // Categorical values are stored as option indices; show the option name.
  const auto& specs = raceml::default_search_space().specs_for(model.family);
  const auto option_name = [&](const std::string& param, std::int64_t index) -> std::string {
    for (const auto& spec : specs)
      if (spec.name == param)
        if (const auto* cat = std::get_if<raceml::Categorical>(&spec.kind))
          if (index >= 0 && static_cast<std::size_t>(index) < cat->options.size())
            return cat->options[static_cast<std::size_t>(index)];
    return std::to_string(index);
  };

  std::cout << "params:";
  for (const auto& setting : model.params) {
    std::cout << " " << setting.name << "=";
    if (const double* d = std::get_if<double>(&setting.value))
      std::cout << nlohmann::json(*d).dump();
    else
      std::cout << option_name(setting.name, std::get<std::int64_t>(setting.value));
  }
  std::cout << "\n";
  std::cout << "features:";
  for (std::size_t j = 0; j < model.feature_names.size(); ++j)
    if (model.mask.test(j)) std::cout << " " << model.feature_names[j];
  std::cout << "\n";
  std::cout << "classes:";
  for (const auto& name : model.class_names) std::cout << " " << name;
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"racing optimizer over a built-in classifier portfolio"};
  app.require_subcommand(1);

  OptimizeArgs opt;
  CLI::App* optimize = app.add_subcommand("optimize", "search for the best model on a CSV");
  optimize->add_option("--data", opt.data_path, "training CSV with a header row")->required();
  optimize->add_option("--label", opt.label_column, "name of the label column")->required();
  optimize->add_option("--seed", opt.seed, "master seed");
  optimize->add_option("--rounds", opt.rounds, "number of generations");
  optimize->add_option("--population", opt.population, "candidates per round");
  optimize->add_option("--survivors", opt.survivors, "candidates kept per round");
  optimize->add_option("--fresh", opt.fresh, "fresh random candidates per round");
  optimize->add_option("--families", opt.families,
                       "comma list of LOGREG,GAUSSIAN_NB,KNN,TREE");
  optimize->add_option("--metric", opt.metric, "accuracy or macro_f1");
  optimize->add_option("--feature-search", opt.feature_search, "on or off")
      ->check(CLI::IsMember({"on", "off"}));
  optimize->add_option("--patience", opt.patience, "early stop after this many flat rounds");
  optimize->add_option("--min-delta", opt.min_delta, "improvement below this counts as flat");
  optimize->add_option("--config", opt.config_path, "JSON run config");
  optimize->add_option("--out", opt.out_path, "model output path");
  optimize->add_option("--report", opt.report_path, "report output path");
  optimize->add_option("--threads", opt.threads, "worker threads (0 = all cores)");

  std::string model_path, data_path, out_path = "predictions.csv", label_column;
  CLI::App* predict = app.add_subcommand("predict", "apply a saved model to a CSV");
  predict->add_option("--model", model_path, "model file")->required();
  predict->add_option("--data", data_path, "input CSV")->required();
  predict->add_option("--out", out_path, "predictions output path");
  predict->add_option("--label", label_column, "label column for scoring, if present");

  std::string inspect_model_path;
  CLI::App* inspect = app.add_subcommand("inspect", "describe a saved model");
  inspect->add_option("--model", inspect_model_path, "model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (optimize->parsed()) return run_optimize(*optimize, opt);
    if (predict->parsed()) return run_predict(model_path, data_path, out_path, label_column);
    return run_inspect(inspect_model_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
