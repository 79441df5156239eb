#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "raceml/errors.hpp"

namespace raceml {

// Tabular feature matrix with integer-coded class labels. Immutable by
// convention after construction; safe to share across concurrent readers.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;  // one row per example
  std::vector<int> labels;                // class code per row
  std::vector<std::string> class_names;   // index == class code

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_features() const { return feature_names.size(); }
  std::size_t n_classes() const { return class_names.size(); }
};

// Throws if structural invariants do not hold: consistent arity, finite
// values, labels in range, at least one row. `require_all_classes` further
// demands every class code to be present (true for freshly loaded data;
// split outputs keep the full class vocabulary and may miss classes).
void validate(const Dataset& ds, bool require_all_classes = false);

// Per-feature inclusion bits. Non-empty by contract everywhere it is used.
class FeatureMask {
 public:
  FeatureMask() = default;
  explicit FeatureMask(std::size_t n, bool value = true) : bits_(n, value ? 1 : 0) {}
  explicit FeatureMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}

  std::size_t size() const { return bits_.size(); }
  bool test(std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool value) { bits_[i] = value ? 1 : 0; }

  std::size_t popcount() const {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

  const std::vector<std::uint8_t>& bits() const { return bits_; }

  bool operator==(const FeatureMask& other) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

struct SplitSpec {
  double train_fraction = 0.6;
  double valid_fraction = 0.2;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  bool stratified = true;
};

// Per-feature standardization statistics. A standard deviation of exactly 0
// flags a constant column; such columns standardize to 0.
struct ScalerStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population sd (divide by n)

  std::size_t size() const { return mean.size(); }
  bool is_constant(std::size_t i) const { return stddev[i] == 0.0; }
};

struct ThreeWaySplit {
  Dataset train;
  Dataset valid;
  Dataset test;
};

// Raw comma-separated cells: header plus data rows of equal arity. Dialect
// v1 is comma-separated UTF-8 with no quoting; blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv_table(const std::string& path);

// Loads a comma-separated file with a header row. The label column is removed
// from the features; class names are the distinct label strings in order of
// first appearance and labels are coded by that order.
Dataset load_csv(const std::string& path, const std::string& label_column);

// Deterministic disjoint partition into train/valid/test. Sizes are
// round-half-up of fraction*n with the test split absorbing the remainder.
// Stratified splits allocate per class and guarantee every class appears in
// the training split.
ThreeWaySplit split_three_way(const Dataset& ds, const SplitSpec& spec);

// Keeps only masked-in columns, in original order. Rows and labels unchanged.
Dataset project(const Dataset& ds, const FeatureMask& mask);

ScalerStats fit_standardizer(const Dataset& ds);

// (x - mean) / sd per cell; constant columns become 0.
Dataset apply_standardizer(const Dataset& ds, const ScalerStats& stats);

}  // namespace raceml
