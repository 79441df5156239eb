#pragma once

// Internal per-family fit/predict entry points shared between the training
// pipeline and the predict dispatcher. Inputs are masked+standardized.

#include <span>

#include "raceml/classifiers.hpp"

namespace raceml::detail {

LogregPayload fit_logreg(const HyperparamAssignment& params, const Dataset& std_ds,
                         std::size_t n_classes);
int predict_logreg(const LogregPayload& payload, std::span<const double> z);

GaussianNbPayload fit_gaussian_nb(const HyperparamAssignment& params, const Dataset& std_ds,
                                  std::size_t n_classes);
std::vector<double> nb_posterior(const GaussianNbPayload& payload, std::span<const double> z);

KnnPayload fit_knn(const Dataset& std_ds);
int predict_knn(const KnnPayload& payload, const HyperparamAssignment& params,
                std::size_t n_classes, std::span<const double> z);

TreePayload fit_tree(const HyperparamAssignment& params, const Dataset& std_ds,
                     std::size_t n_classes);
int predict_tree(const TreePayload& payload, std::span<const double> z);

// Lowest index of the maximal value; the project-wide tie rule.
template <typename Container>
int argmax_lowest(const Container& values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

}  // namespace raceml::detail
