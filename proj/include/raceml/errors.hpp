#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace raceml {

// Every failure the library can raise, discriminated so callers (and tests)
// can react to the specific condition rather than parsing messages.
enum class Errc {
  // dataset
  missing_file,
  missing_column,
  parse_error,
  empty_dataset,
  single_class,
  too_few_rows,
  stratification_impossible,
  length_mismatch,
  empty_mask,
  arity_mismatch,
  // classifiers
  invalid_params,
  degenerate_data,
  wrong_family,
  shape_mismatch,
  empty_counts,
  // search
  unknown_family,
  u_out_of_range,
  invalid_parent,
  // optimizer
  k_too_large,
  infeasible_config,
  // interface
  io_error,
  unsupported_version,
  schema_error,
  column_mismatch,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Cell-level CSV failure. Row is the 1-based data-row index (header excluded),
// col the 1-based column index.
class CsvParseError : public Error {
 public:
  CsvParseError(std::size_t row, std::size_t col, std::string message)
      : Error(Errc::parse_error, std::move(message)), row_(row), col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

// Model-document failure naming the offending field.
class SchemaError : public Error {
 public:
  explicit SchemaError(std::string field)
      : Error(Errc::schema_error, "model document: bad or missing field '" + field + "'"),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace raceml
