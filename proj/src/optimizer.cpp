#include "raceml/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

namespace raceml {

namespace {

bool probability_ok(double p) { return p >= 0.0 && p <= 1.0; }

// Runs work(slot) for every slot on up to n_threads workers. Each slot's
// work writes only its own output, so scheduling cannot affect results.
void parallel_for_slots(std::size_t n_slots, unsigned n_threads,
                        const std::function<void(std::size_t)>& work) {
  if (n_threads == 0) n_threads = std::thread::hardware_concurrency();
  if (n_threads == 0) n_threads = 1;
  n_threads = static_cast<unsigned>(
      std::min<std::size_t>(n_threads, n_slots));

  if (n_threads <= 1) {
    for (std::size_t i = 0; i < n_slots; ++i) work(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    while (true) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= n_slots) return;
      try {
        work(slot);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& thread : threads) thread.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<CandidateSpec> initial_population(const OptimizerConfig& cfg,
                                              std::size_t n_features,
                                              std::uint64_t& next_id,
                                              std::vector<std::string>& warnings) {
  const auto population = static_cast<std::size_t>(cfg.population);
  const std::size_t n_families = cfg.families.size();
  std::vector<CandidateSpec> pop;
  pop.reserve(population);

  if (population < 2 * n_families) {
    // Not enough slots for a full block per family; assign round-robin and
    // say so, since some families may not compete at all.
    for (std::size_t slot = 0; slot < population; ++slot) {
      RngStream stream = derive_stream(cfg.master_seed, 0, slot);
      pop.push_back(sample_candidate(cfg.space, cfg.families[slot % n_families],
                                     n_features, stream, next_id++));
    }
    if (population < n_families)
      warnings.push_back("population " + std::to_string(population) + " is below the " +
                         std::to_string(n_families) +
                         " requested families; some families are absent from round 0");
    else
      warnings.push_back("population " + std::to_string(population) +
                         " is below twice the requested family count; round 0 assigns "
                         "families round-robin");
  } else {
    const std::size_t per_family =
        (population + n_families - 1) / n_families;  // ceil
    for (std::size_t f = 0; f < n_families && pop.size() < population; ++f)
      for (std::size_t i = 0; i < per_family && pop.size() < population; ++i) {
        const std::size_t slot = pop.size();
        RngStream stream = derive_stream(cfg.master_seed, 0, slot);
        pop.push_back(
            sample_candidate(cfg.space, cfg.families[f], n_features, stream, next_id++));
      }
  }
  return pop;
}

Dataset concat_rows(const Dataset& a, const Dataset& b) {
  Dataset out = a;
  out.rows.insert(out.rows.end(), b.rows.begin(), b.rows.end());
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

}  // namespace

void validate(const OptimizerConfig& cfg) {
  if (cfg.rounds < 1) throw Error(Errc::infeasible_config, "rounds must be >= 1");
  if (cfg.population < 2) throw Error(Errc::infeasible_config, "population must be >= 2");
  if (cfg.survivors < 1 || cfg.survivors >= cfg.population)
    throw Error(Errc::infeasible_config, "survivors must satisfy 1 <= survivors < population");
  if (cfg.fresh_per_round < 0 || cfg.survivors + cfg.fresh_per_round > cfg.population)
    throw Error(Errc::infeasible_config, "survivors + fresh_per_round must be <= population");
  if (cfg.families.empty()) throw Error(Errc::infeasible_config, "families must be non-empty");
  for (ModelFamily family : cfg.families)
    if (!cfg.space.has(family))
      throw Error(Errc::infeasible_config,
                  "family " + family_name(family) + " has no search space");
  if (!(cfg.mutation.sigma_cont > 0))
    throw Error(Errc::infeasible_config, "sigma_cont must be > 0");
  if (!probability_ok(cfg.mutation.p_cat) || !probability_ok(cfg.mutation.p_flip) ||
      !probability_ok(cfg.mutation.p_feature_search))
    throw Error(Errc::infeasible_config, "mutation probabilities must lie in [0,1]");
  if (cfg.patience && *cfg.patience < 1)
    throw Error(Errc::infeasible_config, "patience must be >= 1");
  if (cfg.min_delta < 0) throw Error(Errc::infeasible_config, "min_delta must be >= 0");
}

std::vector<std::uint64_t> select_survivors(const std::vector<EvaluationRecord>& records,
                                            std::size_t k) {
  if (k < 1 || k > records.size())
    throw Error(Errc::k_too_large, "survivor count must lie in [1, population]");

  std::vector<const EvaluationRecord*> ranked;
  ranked.reserve(records.size());
  for (const auto& record : records) ranked.push_back(&record);
  std::sort(ranked.begin(), ranked.end(),
            [](const EvaluationRecord* a, const EvaluationRecord* b) {
              if (a->score != b->score) return a->score > b->score;
              return a->candidate_id < b->candidate_id;
            });

  std::vector<std::uint64_t> ids;
  ids.reserve(k);
  for (std::size_t i = 0; i < k; ++i) ids.push_back(ranked[i]->candidate_id);
  return ids;
}

std::vector<CandidateSpec> next_generation(const std::vector<CandidateSpec>& survivors,
                                           const OptimizerConfig& cfg,
                                           const SearchSpace& space, int round,
                                           std::uint64_t master_seed,
                                           std::uint64_t& next_id, std::size_t n_features) {
  if (survivors.empty())
    throw Error(Errc::infeasible_config, "next_generation needs at least one survivor");

  const auto population = static_cast<std::size_t>(cfg.population);
  std::vector<CandidateSpec> pop;
  pop.reserve(population);

  // Elites ride along unchanged, ids included.
  for (const auto& survivor : survivors) pop.push_back(survivor);

  const std::size_t n_families = cfg.families.size();
  for (int f = 0; f < cfg.fresh_per_round && pop.size() < population; ++f) {
    const std::size_t slot = pop.size();
    RngStream stream = derive_stream(master_seed, static_cast<std::uint64_t>(round), slot);
    pop.push_back(sample_candidate(space, cfg.families[static_cast<std::size_t>(f) % n_families],
                                   n_features, stream, next_id++));
  }

  std::size_t parent_cursor = 0;
  while (pop.size() < population) {
    const std::size_t slot = pop.size();
    RngStream stream = derive_stream(master_seed, static_cast<std::uint64_t>(round), slot);
    pop.push_back(mutate_candidate(survivors[parent_cursor % survivors.size()], space,
                                   cfg.mutation, stream, next_id++));
    ++parent_cursor;
  }
  return pop;
}

bool should_stop(const std::vector<double>& best_history, const OptimizerConfig& cfg) {
  if (best_history.empty())
    throw Error(Errc::infeasible_config, "stopping rule needs a non-empty history");
  if (best_history.size() >= static_cast<std::size_t>(cfg.rounds)) return true;
  if (cfg.patience) {
    const auto patience = static_cast<std::size_t>(*cfg.patience);
    if (best_history.size() < patience + 1) return false;
    for (std::size_t r = best_history.size() - patience; r < best_history.size(); ++r)
      if (best_history[r] - best_history[r - 1] >= cfg.min_delta) return false;
    return true;
  }
  return false;
}

RunResult run(const OptimizerConfig& cfg, const Dataset& ds, unsigned n_threads) {
  validate(cfg);
  validate(ds, /*require_all_classes=*/true);

  RunReport report;
  report.config = cfg;

  const ThreeWaySplit splits = split_three_way(ds, cfg.split);
  const std::size_t n_features = ds.n_features();

  std::uint64_t next_id = 0;
  std::vector<CandidateSpec> population =
      initial_population(cfg, n_features, next_id, report.warnings);

  std::vector<double> best_history;
  std::vector<CandidateSpec> survivor_specs;
  std::vector<EvaluationRecord> last_records;

  for (int round = 0;; ++round) {
    const auto started = std::chrono::steady_clock::now();

    // Train and score the whole generation; slot-indexed output keeps the
    // merge independent of completion order.
    std::vector<EvaluationRecord> records(population.size());
    parallel_for_slots(population.size(), n_threads, [&](std::size_t slot) {
      const CandidateSpec& candidate = population[slot];
      RngStream train_stream =
          derive_stream(cfg.master_seed, static_cast<std::uint64_t>(round),
                        (std::uint64_t{1} << 32) + slot);
      const TrainedModel model =
          train(candidate.family, candidate.params, splits.train, candidate.mask, train_stream);
      records[slot] = evaluate(model, splits.valid, cfg.metric, "valid", candidate.id);
    });

    std::sort(records.begin(), records.end(),
              [](const EvaluationRecord& a, const EvaluationRecord& b) {
                return a.candidate_id < b.candidate_id;
              });

    const std::vector<std::uint64_t> survivors =
        select_survivors(records, static_cast<std::size_t>(cfg.survivors));

    double round_best = 0.0;
    for (const auto& record : records)
      if (record.candidate_id == survivors.front()) round_best = record.score;
    const double best_so_far =
        best_history.empty() ? round_best : std::max(best_history.back(), round_best);
    best_history.push_back(best_so_far);

    survivor_specs.clear();
    for (std::uint64_t id : survivors)
      for (const auto& candidate : population)
        if (candidate.id == id) {
          survivor_specs.push_back(candidate);
          break;
        }

    const auto elapsed = std::chrono::steady_clock::now() - started;
    GenerationResult generation;
    generation.round = round;
    generation.records = records;
    generation.survivors = survivors;
    generation.best_score_so_far = best_so_far;
    generation.wall_time_ms =
        std::chrono::duration<double, std::milli>(elapsed).count();
    report.rounds.push_back(std::move(generation));
    last_records = std::move(records);

    if (should_stop(best_history, cfg)) break;
    population = next_generation(survivor_specs, cfg, cfg.space, round + 1,
                                 cfg.master_seed, next_id, n_features);
  }

  // Winner: top survivor of the final round, refit on train+valid, then the
  // single test-split evaluation of the whole run.
  report.winner = survivor_specs.front();
  for (const auto& record : last_records)
    if (record.candidate_id == report.winner.id) report.winner_validation_score = record.score;

  const Dataset refit_ds = concat_rows(splits.train, splits.valid);
  RngStream refit_stream = derive_stream(
      cfg.master_seed, static_cast<std::uint64_t>(report.rounds.size()), std::uint64_t{2} << 32);
  TrainedModel winner_model = train(report.winner.family, report.winner.params, refit_ds,
                                    report.winner.mask, refit_stream);
  report.final_test =
      evaluate(winner_model, splits.test, cfg.metric, "test", report.winner.id);

  return RunResult{std::move(winner_model), std::move(report)};
}

}  // namespace raceml
