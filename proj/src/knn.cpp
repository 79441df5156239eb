#include <algorithm>
#include <cmath>
#include <numeric>

#include "classifier_detail.hpp"

namespace raceml::detail {

KnnPayload fit_knn(const Dataset& std_ds) {
  return KnnPayload{std_ds.rows, std_ds.labels};
}

int predict_knn(const KnnPayload& payload, const HyperparamAssignment& params,
                std::size_t n_classes, std::span<const double> z) {
  const std::size_t n = payload.rows.size();
  const auto k_param = static_cast<std::size_t>(param_int(params, "k"));
  const std::size_t k = std::min(k_param, n);
  const bool inverse_distance = param_int(params, "weighting") == 1;

  std::vector<double> dist_sq(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const auto& row = payload.rows[i];
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double diff = row[j] - z[j];
      acc += diff * diff;
    }
    dist_sq[i] = acc;
  }

  // Neighbor order: distance ascending, stored row index breaking ties.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (dist_sq[a] != dist_sq[b]) return dist_sq[a] < dist_sq[b];
                      return a < b;
                    });

  std::vector<double> votes(n_classes, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t i = order[r];
    const double weight =
        inverse_distance ? 1.0 / (std::sqrt(dist_sq[i]) + 1e-12) : 1.0;
    votes[static_cast<std::size_t>(payload.labels[i])] += weight;
  }
  return argmax_lowest(votes);
}

}  // namespace raceml::detail
