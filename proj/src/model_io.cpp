#include "covkl/model_io.hpp"

#include "covkl/error.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace covkl {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j) {
  const auto r = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(r, r);
  for (Eigen::Index a = 0; a < r; ++a) {
    if (j[static_cast<std::size_t>(a)].size() != static_cast<std::size_t>(r))
      throw ConfigError("model matrix must be square");
    for (Eigen::Index b = 0; b < r; ++b) m(a, b) = j[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].get<double>();
  }
  return m;
}

json margins_json(const std::vector<MarginModel>& margins) {
  json out = json::array();
  for (const auto& mg : margins) out.push_back({{"bandwidth", mg.bandwidth()}, {"values", mg.values()}});
  return out;
}

std::vector<MarginModel> margins_from(const json& j) {
  std::vector<MarginModel> out;
  for (const auto& m : j)
    out.emplace_back(m.at("values").get<std::vector<double>>(), m.at("bandwidth").get<double>());
  return out;
}

json fit_json(const ContinuousFit& fit) {
  return std::visit(
      [](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussDistFit>) {
          return {{"type", "GaussDist"},
                  {"mean", std::vector<double>(f.mean.data(), f.mean.data() + f.mean.size())},
                  {"cov", matrix_json(f.cov)}};
        } else if constexpr (std::is_same_v<T, IndepCopFit>) {
          return {{"type", "IndepCop"}, {"margins", margins_json(f.margins)}};
        } else {
          return {{"type", "GaussCop"}, {"margins", margins_json(f.margins)}, {"corr", matrix_json(f.corr)}};
        }
      },
      fit);
}

ContinuousFit fit_from(const json& j) {
  const auto type = j.at("type").get<std::string>();
  switch (model_kind_from_string(type)) {
  case ModelKind::gauss_dist: {
    const auto mean = j.at("mean").get<std::vector<double>>();
    GaussDistFit f{Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size())),
                   matrix_from(j.at("cov"))};
    if (f.cov.rows() != f.mean.size()) throw ConfigError("GaussDist mean/cov size mismatch");
    return f;
  }
  case ModelKind::indep_cop: return IndepCopFit{margins_from(j.at("margins"))};
  case ModelKind::gauss_cop: {
    GaussCopFit f{margins_from(j.at("margins")), matrix_from(j.at("corr"))};
    if (static_cast<std::size_t>(f.corr.rows()) != f.margins.size())
      throw ConfigError("GaussCop margins/corr size mismatch");
    return f;
  }
  }
  throw ConfigError("unknown fit type");
}

json schema_json(const Schema& schema) {
  json out = json::array();
  for (const auto& c : schema.columns()) out.push_back({{"name", c.name}, {"kind", to_string(c.kind)}});
  return out;
}

Schema schema_from(const json& j) {
  if (!j.is_array()) throw ConfigError("schema must be a JSON list of {name, kind}");
  std::vector<Column> cols;
  for (const auto& c : j)
    cols.push_back({c.at("name").get<std::string>(),
                    column_kind_from_string(c.at("kind").get<std::string>())});
  return Schema(std::move(cols));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <class F>
auto parse_json(const std::string& text, F&& body) {
  try {
    return body(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON document: ") + e.what());
  }
}

} // namespace

std::string model_to_json(const FittedModel& model) {
  json j;
  j["format"] = "covkl-model";
  j["version"] = 1;
  j["kind"] = to_string(model.kind());
  j["schema"] = schema_json(model.schema());
  j["labels"] = model.labels();
  j["continuous"] = model.shared() ? fit_json(*model.shared()) : json(nullptr);
  if (const auto& block = model.discrete()) {
    json per = json::array();
    for (const auto& f : block->per_stratum) per.push_back(fit_json(f));
    j["discrete"] = {{"keys", block->keys}, {"pmf", block->pmf}, {"per_stratum", per}};
  } else {
    j["discrete"] = nullptr;
  }
  return j.dump(2) + "\n";
}

FittedModel model_from_json(const std::string& text) {
  return parse_json(text, [](const json& j) {
    if (j.value("format", "") != "covkl-model") throw ConfigError("not a covkl model file");
    const ModelKind kind = model_kind_from_string(j.at("kind").get<std::string>());
    Schema schema = schema_from(j.at("schema"));
    auto labels = j.at("labels").get<std::vector<std::vector<std::string>>>();
    std::optional<ContinuousFit> shared;
    if (!j.at("continuous").is_null()) shared = fit_from(j.at("continuous"));
    std::optional<DiscreteBlock> block;
    if (!j.at("discrete").is_null()) {
      const auto& d = j.at("discrete");
      DiscreteBlock b;
      b.keys = d.at("keys").get<std::vector<std::vector<int>>>();
      b.pmf = d.at("pmf").get<std::vector<double>>();
      for (const auto& f : d.at("per_stratum")) b.per_stratum.push_back(fit_from(f));
      block = std::move(b);
    }
    return FittedModel(kind, std::move(schema), std::move(labels), std::move(shared), std::move(block));
  });
}

void save_model(const FittedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << model_to_json(model);
}

FittedModel load_model(const std::filesystem::path& path) { return model_from_json(read_file(path)); }

Schema schema_from_json(const std::string& text) {
  return parse_json(text, [](const json& j) { return schema_from(j); });
}

Schema load_schema(const std::filesystem::path& path) { return schema_from_json(read_file(path)); }

std::string schema_to_json(const Schema& schema) { return schema_json(schema).dump(2) + "\n"; }

} // namespace covkl
