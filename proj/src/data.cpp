#include "covkl/data.hpp"

#include "covkl/error.hpp"
#include "covkl/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace covkl {

std::string to_string(ColumnKind kind) {
  return kind == ColumnKind::continuous ? "continuous" : "discrete";
}

ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "continuous") return ColumnKind::continuous;
  if (s == "discrete") return ColumnKind::discrete;
  throw ConfigError("unknown column kind '" + s + "' (expected continuous or discrete)");
}

Schema::Schema(std::vector<Column> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw ConfigError("schema needs at least one column");
  std::unordered_set<std::string> names;
  for (const auto& c : columns_) {
    if (!names.insert(c.name).second)
      throw ConfigError("duplicate column name '" + c.name + "' in schema");
  }
  block_index_.resize(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].kind == ColumnKind::continuous) {
      block_index_[j] = continuous_cols_.size();
      continuous_cols_.push_back(j);
    } else {
      block_index_[j] = discrete_cols_.size();
      discrete_cols_.push_back(j);
    }
  }
  n_continuous_ = continuous_cols_.size();
}

std::size_t Schema::index_of(const std::string& name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j)
    if (columns_[j].name == name) return j;
  throw ConfigError("unknown column '" + name + "'");
}

bool Schema::contains(const std::string& name) const {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&](const Column& c) { return c.name == name; });
}

Dataset::Dataset(Schema schema, PointMatrix continuous, CodeMatrix discrete, MaskMatrix missing,
                 std::vector<std::vector<std::string>> labels)
    : schema_(std::move(schema)), continuous_(std::move(continuous)),
      discrete_(std::move(discrete)), missing_(std::move(missing)), labels_(std::move(labels)) {
  const auto n = continuous_.rows();
  if (static_cast<std::size_t>(continuous_.cols()) != schema_.n_continuous() ||
      static_cast<std::size_t>(discrete_.cols()) != schema_.n_discrete() ||
      discrete_.rows() != n || missing_.rows() != n ||
      static_cast<std::size_t>(missing_.cols()) != schema_.size() ||
      labels_.size() != schema_.n_discrete())
    throw ConfigError("dataset blocks do not match the schema shape");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < schema_.size(); ++j) {
      const auto b = static_cast<Eigen::Index>(schema_.block_index(j));
      if (schema_[j].kind == ColumnKind::continuous) {
        if (missing_(i, j))
          continuous_(i, b) = std::nan("");
        else if (!std::isfinite(continuous_(i, b)))
          throw ConfigError("non-finite value in column '" + schema_[j].name + "', row " +
                            std::to_string(i));
      } else {
        if (missing_(i, j)) {
          discrete_(i, b) = -1;
          continue;
        }
        const int code = discrete_(i, b);
        if (code < 0 || static_cast<std::size_t>(code) >= labels_[b].size())
          throw ConfigError("category code out of range in column '" + schema_[j].name + "'");
      }
    }
  }
}

Dataset Dataset::from_continuous(const PointMatrix& values, std::vector<std::string> names) {
  const auto d = static_cast<std::size_t>(values.cols());
  if (names.empty())
    for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  if (names.size() != d) throw ConfigError("column name count does not match matrix width");
  std::vector<Column> cols;
  for (auto& nm : names) cols.push_back({std::move(nm), ColumnKind::continuous});
  return Dataset(Schema(std::move(cols)), values, CodeMatrix(values.rows(), 0),
                 MaskMatrix::Constant(values.rows(), values.cols(), false), {});
}

Dataset Dataset::take_rows(std::span<const std::size_t> rows) const {
  const auto n = static_cast<Eigen::Index>(rows.size());
  PointMatrix c(n, continuous_.cols());
  CodeMatrix dc(n, discrete_.cols());
  MaskMatrix ms(n, missing_.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto src = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)]);
    if (src >= continuous_.rows()) throw ConfigError("row index out of range");
    c.row(r) = continuous_.row(src);
    dc.row(r) = discrete_.row(src);
    ms.row(r) = missing_.row(src);
  }
  return Dataset(schema_, std::move(c), std::move(dc), std::move(ms), labels_);
}

namespace {

std::uint64_t row_hash(const Dataset& ds, std::size_t i) {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (Eigen::Index j = 0; j < ds.continuous().cols(); ++j)
    h = rng::splitmix64(h ^ std::bit_cast<std::uint64_t>(ds.continuous()(i, j)));
  for (Eigen::Index j = 0; j < ds.discrete().cols(); ++j)
    h = rng::splitmix64(h ^ static_cast<std::uint64_t>(ds.discrete()(i, j)));
  for (Eigen::Index j = 0; j < ds.missing().cols(); ++j)
    h = rng::splitmix64(h ^ (ds.missing()(i, j) ? 0x5bd1e995ULL : 0x1b873593ULL));
  return h;
}

bool rows_identical(const Dataset& ds, std::size_t a, std::size_t b) {
  for (Eigen::Index j = 0; j < ds.continuous().cols(); ++j)
    if (std::bit_cast<std::uint64_t>(ds.continuous()(a, j)) !=
        std::bit_cast<std::uint64_t>(ds.continuous()(b, j)))
      return false;
  return ds.discrete().row(a) == ds.discrete().row(b) &&
         ds.missing().row(a) == ds.missing().row(b);
}

} // namespace

Dataset dedup_rows(const Dataset& ds) {
  std::unordered_multimap<std::uint64_t, std::size_t> seen;
  seen.reserve(ds.n_rows());
  std::vector<std::size_t> keep;
  keep.reserve(ds.n_rows());
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    const auto h = row_hash(ds, i);
    bool dup = false;
    auto [lo, hi] = seen.equal_range(h);
    for (auto it = lo; it != hi && !dup; ++it) dup = rows_identical(ds, it->second, i);
    if (dup) continue;
    seen.emplace(h, i);
    keep.push_back(i);
  }
  if (keep.size() == ds.n_rows()) return ds;
  return ds.take_rows(keep);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_half_indices(std::size_t n,
                                                                                 std::uint64_t seed) {
  if (n < 2) throw ConfigError("split_half needs at least 2 rows");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng::Engine eng(rng::derive(seed, "split_half"));
  std::shuffle(perm.begin(), perm.end(), eng);
  const std::size_t n_train = (n + 1) / 2;
  std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> split_half(const Dataset& ds, std::uint64_t seed) {
  auto [train, test] = split_half_indices(ds.n_rows(), seed);
  return {ds.take_rows(train), ds.take_rows(test)};
}

Dataset inject_mcar(const Dataset& ds, double p, const std::vector<std::string>& columns,
                    std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("missing probability must lie in [0, 1]");
  const Schema& schema = ds.schema();
  std::vector<std::size_t> targets;
  for (const auto& name : columns) targets.push_back(schema.index_of(name));
  MaskMatrix miss = ds.missing();
  for (std::size_t j : targets) {
    const std::uint64_t col_seed = rng::derive(seed, {static_cast<std::uint64_t>(j)});
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      const double u = rng::unit_open(rng::derive(col_seed, {static_cast<std::uint64_t>(i)}));
      if (u < p) miss(i, j) = true;
    }
  }
  return Dataset(schema, ds.continuous(), ds.discrete(), std::move(miss), ds.labels());
}

double complete_fraction(const Dataset& ds) {
  if (ds.n_rows() == 0) return 1.0;
  std::size_t complete = 0;
  for (std::size_t i = 0; i < ds.n_rows(); ++i)
    if (!ds.missing().row(i).any()) ++complete;
  return static_cast<double>(complete) / static_cast<double>(ds.n_rows());
}

Dataset complete_cases(const Dataset& ds) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ds.n_rows(); ++i)
    if (!ds.missing().row(i).any()) keep.push_back(i);
  if (keep.size() == ds.n_rows()) return ds;
  return ds.take_rows(keep);
}

Dataset marginalize_columns(const Dataset& ds, const std::vector<std::string>& keep) {
  if (keep.empty()) throw ConfigError("marginalize_columns needs at least one column to keep");
  const Schema& schema = ds.schema();
  std::vector<Column> cols;
  std::vector<std::size_t> src;
  for (const auto& name : keep) {
    src.push_back(schema.index_of(name));
    cols.push_back(schema[src.back()]);
  }
  Schema out_schema(cols);
  const auto n = static_cast<Eigen::Index>(ds.n_rows());
  PointMatrix c(n, out_schema.n_continuous());
  CodeMatrix dc(n, out_schema.n_discrete());
  MaskMatrix ms(n, out_schema.size());
  std::vector<std::vector<std::string>> labels(out_schema.n_discrete());
  for (std::size_t k = 0; k < src.size(); ++k) {
    const auto from = static_cast<Eigen::Index>(schema.block_index(src[k]));
    const auto to = static_cast<Eigen::Index>(out_schema.block_index(k));
    ms.col(static_cast<Eigen::Index>(k)) = ds.missing().col(static_cast<Eigen::Index>(src[k]));
    if (cols[k].kind == ColumnKind::continuous) {
      c.col(to) = ds.continuous().col(from);
    } else {
      dc.col(to) = ds.discrete().col(from);
      labels[static_cast<std::size_t>(to)] = ds.labels()[static_cast<std::size_t>(from)];
    }
  }
  return Dataset(std::move(out_schema), std::move(c), std::move(dc), std::move(ms),
                 std::move(labels));
}

std::pair<Dataset, Dataset> harmonize_labels(const Dataset& x, const Dataset& y) {
  if (!(x.schema() == y.schema())) throw ConfigError("datasets have different schemas");
  if (x.labels() == y.labels()) return {x, y};
  auto labels = x.labels();
  CodeMatrix ycodes = y.discrete();
  for (std::size_t b = 0; b < labels.size(); ++b) {
    std::unordered_map<std::string, int> code;
    for (std::size_t c = 0; c < labels[b].size(); ++c) code[labels[b][c]] = static_cast<int>(c);
    std::vector<int> remap(y.labels()[b].size());
    for (std::size_t c = 0; c < remap.size(); ++c) {
      auto [it, inserted] = code.try_emplace(y.labels()[b][c], static_cast<int>(labels[b].size()));
      if (inserted) labels[b].push_back(y.labels()[b][c]);
      remap[c] = it->second;
    }
    for (Eigen::Index i = 0; i < ycodes.rows(); ++i) {
      int& v = ycodes(i, static_cast<Eigen::Index>(b));
      if (v >= 0) v = remap[static_cast<std::size_t>(v)];
    }
  }
  Dataset hx(x.schema(), x.continuous(), x.discrete(), x.missing(), labels);
  Dataset hy(y.schema(), y.continuous(), std::move(ycodes), y.missing(), std::move(labels));
  return {std::move(hx), std::move(hy)};
}

} // namespace covkl
