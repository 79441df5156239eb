#include "raceml/evaluator.hpp"

#include <array>

namespace raceml {

namespace {
const std::array<std::string, 2> kMetricNames = {"accuracy", "macro_f1"};
}

const std::string& metric_name(Metric metric) {
  return kMetricNames[static_cast<std::size_t>(metric)];
}

Metric metric_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kMetricNames.size(); ++i)
    if (kMetricNames[i] == name) return static_cast<Metric>(i);
  throw Error(Errc::infeasible_config, "unknown metric '" + name + "'");
}

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels,
                          std::size_t n_classes) {
  if (preds.size() != labels.size() || preds.empty())
    throw Error(Errc::length_mismatch, "confusion needs equal non-empty preds and labels");

  ConfusionMatrix cm;
  cm.n_classes = n_classes;
  cm.counts.assign(n_classes * n_classes, 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int t = labels[i];
    const int p = preds[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= n_classes ||
        static_cast<std::size_t>(p) >= n_classes)
      throw Error(Errc::length_mismatch, "class index out of range");
    ++cm.counts[static_cast<std::size_t>(t) * n_classes + static_cast<std::size_t>(p)];
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  std::size_t trace = 0;
  for (std::size_t c = 0; c < cm.n_classes; ++c) trace += cm.at(c, c);
  return static_cast<double>(trace) / static_cast<double>(cm.total());
}

double macro_f1(const ConfusionMatrix& cm) {
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < cm.n_classes; ++c) {
    std::size_t actual = 0, predicted = 0;
    for (std::size_t k = 0; k < cm.n_classes; ++k) {
      actual += cm.at(c, k);
      predicted += cm.at(k, c);
    }
    const std::size_t hits = cm.at(c, c);
    const double precision =
        predicted == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(predicted);
    const double recall =
        actual == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(actual);
    if (precision + recall > 0.0) f1_sum += 2.0 * precision * recall / (precision + recall);
  }
  return f1_sum / static_cast<double>(cm.n_classes);
}

double metric_score(const ConfusionMatrix& cm, Metric metric) {
  return metric == Metric::accuracy ? accuracy(cm) : macro_f1(cm);
}

EvaluationRecord evaluate(const TrainedModel& model, const Dataset& ds, Metric metric,
                          const std::string& split_name, std::uint64_t candidate_id) {
  if (ds.n_features() != model.mask.size())
    throw Error(Errc::arity_mismatch, "dataset arity does not match model");

  std::vector<int> preds;
  preds.reserve(ds.n_rows());
  for (const auto& row : ds.rows) preds.push_back(predict(model, row));

  const ConfusionMatrix cm =
      confusion(preds, ds.labels, static_cast<std::size_t>(model.n_classes));
  return EvaluationRecord{candidate_id, split_name, metric, metric_score(cm, metric),
                          ds.n_rows()};
}

}  // namespace raceml
