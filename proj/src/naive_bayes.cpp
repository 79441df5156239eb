#include <algorithm>
#include <cmath>
#include <numbers>

#include "classifier_detail.hpp"

namespace raceml::detail {

GaussianNbPayload fit_gaussian_nb(const HyperparamAssignment& params, const Dataset& std_ds,
                                  std::size_t n_classes) {
  const double smoothing = param_double(params, "smoothing");
  const std::size_t n = std_ds.n_rows();
  const std::size_t d = std_ds.n_features();

  GaussianNbPayload payload;
  payload.priors.assign(n_classes, 0.0);
  payload.means.assign(n_classes, std::vector<double>(d, 0.0));
  payload.variances.assign(n_classes, std::vector<double>(d, 0.0));

  std::vector<std::size_t> class_counts(n_classes, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(std_ds.labels[i]);
    ++class_counts[c];
    for (std::size_t j = 0; j < d; ++j) payload.means[c][j] += std_ds.rows[i][j];
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    payload.priors[c] = static_cast<double>(class_counts[c]) / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j)
      payload.means[c][j] /= static_cast<double>(class_counts[c]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(std_ds.labels[i]);
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = std_ds.rows[i][j] - payload.means[c][j];
      payload.variances[c][j] += dev * dev;
    }
  }

  // Variance floor: smoothing times the largest overall feature variance.
  // Population variances throughout.
  const ScalerStats overall = fit_standardizer(std_ds);
  double max_var = 0.0;
  for (std::size_t j = 0; j < d; ++j)
    max_var = std::max(max_var, overall.stddev[j] * overall.stddev[j]);
  double floor = smoothing * max_var;
  if (floor <= 0.0) floor = smoothing;  // all features constant; keep the floor positive

  for (std::size_t c = 0; c < n_classes; ++c)
    for (std::size_t j = 0; j < d; ++j) {
      double var = payload.variances[c][j] / static_cast<double>(class_counts[c]);
      payload.variances[c][j] = std::max(var, floor);
    }
  return payload;
}

std::vector<double> nb_posterior(const GaussianNbPayload& payload, std::span<const double> z) {
  const std::size_t n_classes = payload.priors.size();
  const std::size_t d = z.size();

  std::vector<double> log_post(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    double lp = std::log(payload.priors[c]);
    for (std::size_t j = 0; j < d; ++j) {
      const double var = payload.variances[c][j];
      const double dev = z[j] - payload.means[c][j];
      lp += -0.5 * std::log(2.0 * std::numbers::pi * var) - dev * dev / (2.0 * var);
    }
    log_post[c] = lp;
  }

  const double top = *std::max_element(log_post.begin(), log_post.end());
  double sum = 0.0;
  for (double& lp : log_post) {
    lp = std::exp(lp - top);
    sum += lp;
  }
  for (double& lp : log_post) lp /= sum;
  return log_post;
}

}  // namespace raceml::detail
