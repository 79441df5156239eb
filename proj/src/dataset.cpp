#include "raceml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>
#include <unordered_map>

#include "raceml/rng.hpp"

namespace raceml {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  // CSV dialect v1: comma separator, no quoting.
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

bool parse_finite_double(std::string_view text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out, std::chars_format::general);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

void fisher_yates(std::vector<std::size_t>& indices, RngStream& stream) {
  if (indices.size() < 2) return;
  for (std::size_t i = indices.size() - 1; i > 0; --i) {
    std::size_t j = stream.next_below(i + 1);
    std::swap(indices[i], indices[j]);
  }
}

Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.feature_names = ds.feature_names;
  out.class_names = ds.class_names;
  out.rows.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    out.rows.push_back(ds.rows[i]);
    out.labels.push_back(ds.labels[i]);
  }
  return out;
}

}  // namespace

void validate(const Dataset& ds, bool require_all_classes) {
  if (ds.rows.empty()) throw Error(Errc::empty_dataset, "dataset has no rows");
  if (ds.rows.size() != ds.labels.size())
    throw Error(Errc::length_mismatch, "row/label count mismatch");
  for (const auto& row : ds.rows) {
    if (row.size() != ds.feature_names.size())
      throw Error(Errc::length_mismatch, "row arity does not match feature names");
    for (double v : row)
      if (!std::isfinite(v))
        throw Error(Errc::parse_error, "non-finite feature value");
  }
  std::vector<bool> seen(ds.class_names.size(), false);
  for (int label : ds.labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= ds.class_names.size())
      throw Error(Errc::length_mismatch, "label out of class range");
    seen[static_cast<std::size_t>(label)] = true;
  }
  if (require_all_classes)
    for (std::size_t c = 0; c < seen.size(); ++c)
      if (!seen[c])
        throw Error(Errc::degenerate_data,
                    "class '" + ds.class_names[c] + "' has no rows");
}

CsvTable read_csv_table(const std::string& path) {
  std::ifstream file(path);
  if (!file.is_open())
    throw Error(Errc::missing_file, "cannot open '" + path + "'");

  std::string line;
  if (!std::getline(file, line))
    throw Error(Errc::empty_dataset, "'" + path + "' is empty");
  strip_cr(line);
  // Strip a UTF-8 BOM if present.
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  CsvTable table;
  table.header = split_line(line);

  std::size_t data_row = 0;
  while (std::getline(file, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    ++data_row;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != table.header.size())
      throw CsvParseError(data_row, cells.size(),
                          "row " + std::to_string(data_row) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(table.header.size()));
    table.rows.push_back(std::move(cells));
  }
  if (table.rows.empty())
    throw Error(Errc::empty_dataset, "'" + path + "' has no data rows");
  return table;
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
  const CsvTable table = read_csv_table(path);

  std::size_t label_col = table.header.size();
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (table.header[i] == label_column) {
      label_col = i;
      break;
    }
  if (label_col == table.header.size())
    throw Error(Errc::missing_column, "label column '" + label_column + "' not found");

  Dataset ds;
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (i != label_col) ds.feature_names.push_back(table.header[i]);

  std::unordered_map<std::string, int> class_codes;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    std::vector<double> row;
    row.reserve(table.header.size() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_col) continue;
      double value;
      if (!parse_finite_double(cells[c], value))
        throw CsvParseError(r + 1, c + 1,
                            "row " + std::to_string(r + 1) + ", column '" +
                                table.header[c] + "': cannot parse '" + cells[c] + "'");
      row.push_back(value);
    }
    const std::string& label = cells[label_col];
    auto [it, inserted] = class_codes.try_emplace(label, static_cast<int>(ds.class_names.size()));
    if (inserted) ds.class_names.push_back(label);
    ds.labels.push_back(it->second);
    ds.rows.push_back(std::move(row));
  }

  if (ds.class_names.size() < 2)
    throw Error(Errc::single_class,
                "label column '" + label_column + "' has fewer than 2 distinct values");
  validate(ds, /*require_all_classes=*/true);
  return ds;
}

ThreeWaySplit split_three_way(const Dataset& ds, const SplitSpec& spec) {
  validate(ds);
  const double fraction_sum = spec.train_fraction + spec.valid_fraction + spec.test_fraction;
  if (std::abs(fraction_sum - 1.0) > 1e-9)
    throw Error(Errc::infeasible_config, "split fractions must sum to 1");
  if (spec.train_fraction <= 0 || spec.valid_fraction <= 0 || spec.test_fraction <= 0)
    throw Error(Errc::infeasible_config, "split fractions must be positive");

  const std::size_t n = ds.n_rows();
  if (n < 3) throw Error(Errc::too_few_rows, "need at least 3 rows to split three ways");

  RngStream stream(spec.seed);
  std::vector<std::size_t> train_idx, valid_idx, test_idx;

  if (!spec.stratified) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    fisher_yates(order, stream);

    const std::size_t n_train = round_half_up(spec.train_fraction * static_cast<double>(n));
    const std::size_t n_valid = round_half_up(spec.valid_fraction * static_cast<double>(n));
    if (n_train == 0 || n_valid == 0 || n_train + n_valid >= n)
      throw Error(Errc::too_few_rows, "split sizes leave an empty split");

    train_idx.assign(order.begin(), order.begin() + n_train);
    valid_idx.assign(order.begin() + n_train, order.begin() + n_train + n_valid);
    test_idx.assign(order.begin() + n_train + n_valid, order.end());
  } else {
    // Group row indices by class, shuffle each group, then allocate
    // per class. Training gets at least one row of every class.
    std::vector<std::vector<std::size_t>> by_class(ds.n_classes());
    for (std::size_t i = 0; i < n; ++i)
      by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

    for (auto& group : by_class) fisher_yates(group, stream);

    for (const auto& group : by_class) {
      const auto n_c = group.size();
      if (n_c == 0) continue;
      std::size_t c_train = round_half_up(spec.train_fraction * static_cast<double>(n_c));
      if (c_train == 0) c_train = 1;
      if (c_train > n_c) c_train = n_c;
      std::size_t c_valid = round_half_up(spec.valid_fraction * static_cast<double>(n_c));
      if (c_train + c_valid > n_c) c_valid = n_c - c_train;
      for (std::size_t i = 0; i < n_c; ++i) {
        if (i < c_train)
          train_idx.push_back(group[i]);
        else if (i < c_train + c_valid)
          valid_idx.push_back(group[i]);
        else
          test_idx.push_back(group[i]);
      }
    }
    if (valid_idx.empty() || test_idx.empty())
      throw Error(Errc::stratification_impossible,
                  "per-class allocation leaves an empty split");
  }

  if (train_idx.empty() || valid_idx.empty() || test_idx.empty())
    throw Error(Errc::too_few_rows, "split produced an empty partition");

  return ThreeWaySplit{take_rows(ds, train_idx), take_rows(ds, valid_idx),
                       take_rows(ds, test_idx)};
}

Dataset project(const Dataset& ds, const FeatureMask& mask) {
  if (mask.size() != ds.n_features())
    throw Error(Errc::length_mismatch, "mask length does not match feature count");
  if (mask.popcount() == 0) throw Error(Errc::empty_mask, "mask selects no features");

  Dataset out;
  out.class_names = ds.class_names;
  out.labels = ds.labels;
  for (std::size_t j = 0; j < ds.n_features(); ++j)
    if (mask.test(j)) out.feature_names.push_back(ds.feature_names[j]);
  out.rows.reserve(ds.n_rows());
  for (const auto& row : ds.rows) {
    std::vector<double> projected;
    projected.reserve(out.feature_names.size());
    for (std::size_t j = 0; j < row.size(); ++j)
      if (mask.test(j)) projected.push_back(row[j]);
    out.rows.push_back(std::move(projected));
  }
  return out;
}

ScalerStats fit_standardizer(const Dataset& ds) {
  validate(ds);
  const std::size_t n = ds.n_rows();
  const std::size_t d = ds.n_features();
  ScalerStats stats;
  stats.mean.assign(d, 0.0);
  stats.stddev.assign(d, 0.0);

  for (const auto& row : ds.rows)
    for (std::size_t j = 0; j < d; ++j) stats.mean[j] += row[j];
  for (std::size_t j = 0; j < d; ++j) stats.mean[j] /= static_cast<double>(n);

  for (const auto& row : ds.rows)
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = row[j] - stats.mean[j];
      stats.stddev[j] += dev * dev;
    }
  for (std::size_t j = 0; j < d; ++j)
    stats.stddev[j] = std::sqrt(stats.stddev[j] / static_cast<double>(n));
  return stats;
}

Dataset apply_standardizer(const Dataset& ds, const ScalerStats& stats) {
  if (stats.size() != ds.n_features())
    throw Error(Errc::arity_mismatch, "scaler arity does not match feature count");

  Dataset out = ds;
  for (auto& row : out.rows)
    for (std::size_t j = 0; j < row.size(); ++j)
      row[j] = stats.is_constant(j) ? 0.0 : (row[j] - stats.mean[j]) / stats.stddev[j];
  return out;
}

}  // namespace raceml
