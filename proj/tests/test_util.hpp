#pragma once

// Shared fixture builders for the test suites.

#include <string>
#include <vector>

#include "raceml/dataset.hpp"
#include "raceml/rng.hpp"

namespace raceml::testutil {

inline Dataset make_dataset(std::vector<std::vector<double>> rows, std::vector<int> labels,
                            std::size_t n_classes = 2) {
  Dataset ds;
  ds.rows = std::move(rows);
  ds.labels = std::move(labels);
  const std::size_t n_features = ds.rows.empty() ? 0 : ds.rows.front().size();
  for (std::size_t j = 0; j < n_features; ++j)
    ds.feature_names.push_back("f" + std::to_string(j));
  for (std::size_t c = 0; c < n_classes; ++c)
    ds.class_names.push_back("c" + std::to_string(c));
  return ds;
}

inline Dataset random_dataset(std::size_t n_rows, std::size_t n_features,
                              std::size_t n_classes, std::uint64_t seed) {
  RngStream stream(seed);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  rows.reserve(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    std::vector<double> row(n_features);
    for (auto& v : row) v = stream.next_gaussian() * 3.0 + 1.0;
    rows.push_back(std::move(row));
    // Round-robin labels keep every class present.
    labels.push_back(static_cast<int>(i % n_classes));
  }
  return make_dataset(std::move(rows), std::move(labels), n_classes);
}

// Two well-separated Gaussian blobs in `informative` dimensions followed by
// pure-noise features; the acceptance experiments use the same shape.
inline Dataset gaussian_blobs(std::size_t n_per_class, std::size_t noise_features,
                              double separation, std::uint64_t seed) {
  RngStream stream(seed);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
    const int label = static_cast<int>(i % 2);
    const double center = label == 0 ? 0.0 : separation;
    std::vector<double> row;
    row.push_back(center + stream.next_gaussian());
    row.push_back(center + stream.next_gaussian());
    for (std::size_t j = 0; j < noise_features; ++j) row.push_back(stream.next_gaussian());
    rows.push_back(std::move(row));
    labels.push_back(label);
  }
  return make_dataset(std::move(rows), std::move(labels), 2);
}

}  // namespace raceml::testutil
