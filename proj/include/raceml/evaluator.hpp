#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "raceml/classifiers.hpp"

namespace raceml {

struct ConfusionMatrix {
  std::size_t n_classes = 0;
  std::vector<std::size_t> counts;  // row-major; counts[t * n_classes + p]

  std::size_t at(std::size_t truth, std::size_t predicted) const {
    return counts[truth * n_classes + predicted];
  }
  std::size_t total() const {
    std::size_t sum = 0;
    for (std::size_t c : counts) sum += c;
    return sum;
  }
};

enum class Metric { accuracy, macro_f1 };

const std::string& metric_name(Metric metric);
Metric metric_from_name(const std::string& name);

struct EvaluationRecord {
  std::uint64_t candidate_id = 0;
  std::string split_name;  // train | valid | test
  Metric metric = Metric::accuracy;
  double score = 0.0;
  std::size_t n_examples = 0;
};

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels,
                          std::size_t n_classes);

// trace / total.
double accuracy(const ConfusionMatrix& cm);

// Unweighted mean over classes of F1 = 2PR/(P+R). Precision or recall with a
// zero denominator is 0, and F1 with P+R = 0 is 0.
double macro_f1(const ConfusionMatrix& cm);

double metric_score(const ConfusionMatrix& cm, Metric metric);

// Scores `model` over every row of `ds` (raw feature order) and wraps the
// result in a record. Pure and deterministic.
EvaluationRecord evaluate(const TrainedModel& model, const Dataset& ds, Metric metric,
                          const std::string& split_name, std::uint64_t candidate_id);

}  // namespace raceml
