#pragma once

#include "covkl/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace covkl {

enum class ColumnKind { continuous, discrete };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  bool operator==(const Column&) const = default;
};

std::string to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string& s);

/// Ordered column list with unique names. Each column also has a position
/// inside its kind-specific block (continuous matrix or discrete matrix).
class Schema {
public:
  Schema() = default;
  explicit Schema(std::vector<Column> columns);

  std::size_t size() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }
  const Column& operator[](std::size_t j) const { return columns_[j]; }

  std::size_t n_continuous() const { return n_continuous_; }
  std::size_t n_discrete() const { return columns_.size() - n_continuous_; }

  /// Position of column `j` inside its kind-specific block.
  std::size_t block_index(std::size_t j) const { return block_index_[j]; }
  /// Schema position of the `c`-th continuous / `c`-th discrete column.
  std::size_t continuous_column(std::size_t c) const { return continuous_cols_[c]; }
  std::size_t discrete_column(std::size_t c) const { return discrete_cols_[c]; }

  /// Throws ConfigError for unknown names.
  std::size_t index_of(const std::string& name) const;
  bool contains(const std::string& name) const;

  bool operator==(const Schema& other) const { return columns_ == other.columns_; }

private:
  std::vector<Column> columns_;
  std::vector<std::size_t> block_index_;
  std::vector<std::size_t> continuous_cols_;
  std::vector<std::size_t> discrete_cols_;
  std::size_t n_continuous_ = 0;
};

/// Rectangular sample with continuous values, discrete category codes and a
/// per-cell missingness mask (columns in schema order). Missing continuous
/// cells hold NaN and missing discrete cells hold -1. Immutable once built.
class Dataset {
public:
  Dataset() = default;
  Dataset(Schema schema, PointMatrix continuous, CodeMatrix discrete, MaskMatrix missing,
          std::vector<std::vector<std::string>> labels);

  /// Fully observed, purely continuous dataset.
  static Dataset from_continuous(const PointMatrix& values, std::vector<std::string> names = {});

  const Schema& schema() const { return schema_; }
  std::size_t n_rows() const { return static_cast<std::size_t>(continuous_.rows()); }
  std::size_t n_cols() const { return schema_.size(); }
  const PointMatrix& continuous() const { return continuous_; }
  const CodeMatrix& discrete() const { return discrete_; }
  const MaskMatrix& missing() const { return missing_; }
  const std::vector<std::vector<std::string>>& labels() const { return labels_; }

  bool is_missing(std::size_t row, std::size_t col) const { return missing_(row, col); }
  bool has_missing() const { return missing_.any(); }

  /// Rows in the given order (repeats allowed).
  Dataset take_rows(std::span<const std::size_t> rows) const;

private:
  Schema schema_;
  PointMatrix continuous_;
  CodeMatrix discrete_;
  MaskMatrix missing_;
  std::vector<std::vector<std::string>> labels_;
};

struct CsvOptions {
  std::string missing_token;
};

Dataset load_csv(const std::filesystem::path& path, const Schema& schema,
                 const CsvOptions& options = {});
Dataset parse_csv(const std::string& text, const Schema& schema, const CsvOptions& options = {});
/// Continuous values at 17 significant digits; missing cells as the missing token.
std::string to_csv(const Dataset& ds, const CsvOptions& options = {});
void save_csv(const Dataset& ds, const std::filesystem::path& path, const CsvOptions& options = {});

/// Keeps the first occurrence of each exact row (bit-equal values, equal codes, equal mask).
Dataset dedup_rows(const Dataset& ds);

/// Random partition; train gets ceil(n/2) rows. Row order is preserved within each part.
std::pair<Dataset, Dataset> split_half(const Dataset& ds, std::uint64_t seed);
/// Same partition as split_half, as row indices.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_half_indices(std::size_t n,
                                                                                 std::uint64_t seed);

/// Flags each cell of `columns` missing with probability p. The decision for a
/// cell depends only on (seed, schema column index, row index).
Dataset inject_mcar(const Dataset& ds, double p, const std::vector<std::string>& columns,
                    std::uint64_t seed);

/// Fraction of rows without any missing cell.
double complete_fraction(const Dataset& ds);

/// Drops rows containing a missing cell.
Dataset complete_cases(const Dataset& ds);

/// Keeps only the named columns, in the given order.
Dataset marginalize_columns(const Dataset& ds, const std::vector<std::string>& keep);

/// Re-expresses `y`'s discrete codes in `x`'s label lists (labels new to x are
/// appended). Returns both datasets with identical label lists.
std::pair<Dataset, Dataset> harmonize_labels(const Dataset& x, const Dataset& y);

} // namespace covkl
