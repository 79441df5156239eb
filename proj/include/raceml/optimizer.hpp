#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "raceml/classifiers.hpp"
#include "raceml/dataset.hpp"
#include "raceml/evaluator.hpp"
#include "raceml/search.hpp"

namespace raceml {

struct OptimizerConfig {
  std::uint64_t master_seed = 0;
  int rounds = 5;
  int population = 16;
  int survivors = 4;
  int fresh_per_round = 4;
  std::vector<ModelFamily> families = {ModelFamily::logreg, ModelFamily::gaussian_nb,
                                       ModelFamily::knn, ModelFamily::tree};
  Metric metric = Metric::accuracy;
  MutationConfig mutation;
  SplitSpec split;
  std::optional<int> patience;  // early-stop rounds without improvement
  double min_delta = 0.0;
  SearchSpace space = default_search_space();
};

void validate(const OptimizerConfig& cfg);  // throws infeasible_config

struct GenerationResult {
  int round = 0;
  std::vector<EvaluationRecord> records;  // validation split, candidate id ascending
  std::vector<std::uint64_t> survivors;   // rank order: score desc, id asc
  double best_score_so_far = 0.0;
  double wall_time_ms = 0.0;
};

struct RunReport {
  OptimizerConfig config;
  std::vector<GenerationResult> rounds;
  CandidateSpec winner;
  double winner_validation_score = 0.0;
  EvaluationRecord final_test;  // computed exactly once, after the loop
  std::vector<std::string> warnings;
};

struct RunResult {
  TrainedModel model;  // winner refit on train+valid
  RunReport report;
};

// The full race: split three ways, seed a population across the requested
// families, then per round train every candidate on the train split
// (concurrently), score on the validation split, keep the best performers,
// and rebuild the population from elites, fresh samples, and mutated
// children. After the loop the winner is refit on train+valid and scored
// exactly once on the test split.
//
// The report (minus wall times) depends only on (cfg, ds): every candidate
// owns a pre-derived RNG stream and results merge by slot, so thread count
// and completion order cannot change the outcome.
RunResult run(const OptimizerConfig& cfg, const Dataset& ds, unsigned n_threads = 0);

// Top-k candidate ids by (score descending, id ascending).
std::vector<std::uint64_t> select_survivors(const std::vector<EvaluationRecord>& records,
                                            std::size_t k);

// Next population: survivors carried over unchanged, then fresh_per_round
// newly sampled candidates (families round-robin), then mutated children of
// the survivors in rank order until the population is full. New candidates
// take sequential ids and a stream derived from (master_seed, round, slot).
std::vector<CandidateSpec> next_generation(const std::vector<CandidateSpec>& survivors,
                                           const OptimizerConfig& cfg,
                                           const SearchSpace& space, int round,
                                           std::uint64_t master_seed,
                                           std::uint64_t& next_id, std::size_t n_features);

// True when the round budget is exhausted, or when `patience` is set and
// each of the last `patience` rounds improved the best score by < min_delta.
bool should_stop(const std::vector<double>& best_history, const OptimizerConfig& cfg);

}  // namespace raceml
