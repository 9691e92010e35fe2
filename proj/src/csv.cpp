#include "covkl/data.hpp"
#include "covkl/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace covkl {
namespace {

std::vector<std::vector<std::string>> split_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        fields.push_back(std::move(field));
        records.push_back(std::move(fields));
      }
      fields.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ConfigError("unterminated quoted field in CSV input");
  if (any || !field.empty()) {
    fields.push_back(std::move(field));
    records.push_back(std::move(fields));
  }
  return records;
}

bool parse_double(const std::string& s, double& out) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  if (b == e) return false;
  const char* first = s.data() + b;
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + e, out);
  return ec == std::errc() && ptr == s.data() + e;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

} // namespace

Dataset parse_csv(const std::string& text, const Schema& schema, const CsvOptions& options) {
  const auto records = split_records(text);
  if (records.empty()) throw ConfigError("empty CSV input");
  const auto& header = records.front();
  if (header.size() != schema.size())
    throw ConfigError("CSV header has " + std::to_string(header.size()) +
                      " columns, schema has " + std::to_string(schema.size()));
  // file column -> schema column
  std::vector<std::size_t> to_schema(header.size());
  std::vector<bool> seen(schema.size(), false);
  for (std::size_t f = 0; f < header.size(); ++f) {
    if (!schema.contains(header[f]))
      throw ConfigError("CSV header column '" + header[f] + "' is not in the schema");
    const std::size_t j = schema.index_of(header[f]);
    if (seen[j]) throw ConfigError("CSV header repeats column '" + header[f] + "'");
    seen[j] = true;
    to_schema[f] = j;
  }

  const std::size_t n = records.size() - 1;
  PointMatrix cont(n, schema.n_continuous());
  CodeMatrix disc(n, schema.n_discrete());
  MaskMatrix miss = MaskMatrix::Constant(n, schema.size(), false);
  std::vector<std::vector<std::string>> labels(schema.n_discrete());
  std::vector<std::unordered_map<std::string, int>> label_codes(schema.n_discrete());

  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = records[i + 1];
    if (rec.size() != header.size())
      throw ParseError("CSV row " + std::to_string(i + 1) + " has " + std::to_string(rec.size()) +
                           " fields, expected " + std::to_string(header.size()),
                       i + 1, "");
    for (std::size_t f = 0; f < rec.size(); ++f) {
      const std::size_t j = to_schema[f];
      const std::size_t b = schema.block_index(j);
      const std::string& cell = rec[f];
      const bool is_missing = cell == options.missing_token;
      miss(i, j) = is_missing;
      if (schema[j].kind == ColumnKind::continuous) {
        if (is_missing) {
          cont(i, b) = std::nan("");
          continue;
        }
        double v = 0.0;
        if (!parse_double(cell, v) || !std::isfinite(v))
          throw ParseError("cannot parse '" + cell + "' as a finite number at row " +
                               std::to_string(i + 1) + ", column '" + schema[j].name + "'",
                           i + 1, schema[j].name);
        cont(i, b) = v;
      } else {
        if (is_missing) {
          disc(i, b) = -1;
          continue;
        }
        auto [it, inserted] = label_codes[b].try_emplace(cell, static_cast<int>(labels[b].size()));
        if (inserted) labels[b].push_back(cell);
        disc(i, b) = it->second;
      }
    }
  }
  return Dataset(schema, std::move(cont), std::move(disc), std::move(miss), std::move(labels));
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema,
                 const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema, options);
}

std::string to_csv(const Dataset& ds, const CsvOptions& options) {
  const Schema& schema = ds.schema();
  std::string out;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (j) out += ',';
    out += quote_if_needed(schema[j].name);
  }
  out += '\n';
  char buf[64];
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (j) out += ',';
      if (ds.is_missing(i, j)) {
        out += quote_if_needed(options.missing_token);
        continue;
      }
      const std::size_t b = schema.block_index(j);
      if (schema[j].kind == ColumnKind::continuous) {
        std::snprintf(buf, sizeof buf, "%.17g", ds.continuous()(i, b));
        out += buf;
      } else {
        out += quote_if_needed(ds.labels()[b][static_cast<std::size_t>(ds.discrete()(i, b))]);
      }
    }
    out += '\n';
  }
  return out;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path, const CsvOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << to_csv(ds, options);
}

} // namespace covkl
