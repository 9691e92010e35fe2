#include "covkl/harness.hpp"

#include "covkl/error.hpp"
#include "covkl/kld.hpp"
#include "covkl/mixed.hpp"
#include "covkl/model_io.hpp"
#include "covkl/rng.hpp"
#include "covkl/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <set>

namespace covkl::harness {

using nlohmann::json;

namespace {
constexpr const char* kVersion = "1.0.0";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
} // namespace

std::string to_string(Experiment e) {
  switch (e) {
  case Experiment::eval: return "eval";
  case Experiment::missing: return "missing";
  case Experiment::latent: return "latent";
  case Experiment::scale: return "scale";
  case Experiment::benchmark: return "benchmark";
  }
  return "?";
}

Experiment experiment_from_string(const std::string& s) {
  for (auto e : {Experiment::eval, Experiment::missing, Experiment::latent, Experiment::scale,
                 Experiment::benchmark})
    if (to_string(e) == s) return e;
  throw ConfigError("unknown experiment '" + s + "'");
}

void ExperimentConfig::validate() const {
  subsampling.validate();
  if (experiment == Experiment::benchmark) {
    if (cases.empty()) throw ConfigError("benchmark needs at least one case");
    for (const auto& c : cases) {
      if (c.n < 2 || c.m < 1 || c.replicates < 1)
        throw ConfigError("benchmark case '" + c.name + "' needs n >= 2, m >= 1, replicates >= 1");
      kld_gaussian_analytic(c.mu_p, c.cov_p, c.mu_q, c.cov_q); // dimension and PD checks
    }
    for (const auto& e : estimators)
      if (e != "bc" && e != "nn") throw ConfigError("unknown estimator '" + e + "'");
    return;
  }
  if (!data_path && !synthetic) throw ConfigError("config needs either 'data' or 'synthetic'");
  if (models.empty()) throw ConfigError("config lists no models");
  if (n_sim < 2) throw ConfigError("n_sim must be at least 2");
  std::set<std::string> names;
  for (const auto& m : models)
    if (!names.insert(m.name).second) throw ConfigError("duplicate model name '" + m.name + "'");
  for (double p : missing_fractions)
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("missing fractions must lie in [0, 1)");
  if (data_path) {
    for (const auto& c : missing_columns) schema.index_of(c);
    for (const auto& c : observed) schema.index_of(c);
  }
  if (experiment == Experiment::latent && observed.empty())
    throw ConfigError("latent experiment needs a non-empty 'observed' column list");
}

namespace {

Eigen::VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd matrix_from(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != static_cast<std::size_t>(m.cols())) throw ConfigError("ragged matrix in config");
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return m;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

} // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    cfg.id = j.value("id", cfg.id);
    cfg.experiment = experiment_from_string(j.value("experiment", std::string("eval")));
    if (j.contains("cases")) {
      if (!j.contains("experiment")) cfg.experiment = Experiment::benchmark;
      for (const auto& c : j.at("cases")) {
        GaussianCase g;
        g.name = c.at("name").get<std::string>();
        g.mu_p = vector_from(c.at("mu_p"));
        g.cov_p = matrix_from(c.at("cov_p"));
        g.mu_q = vector_from(c.at("mu_q"));
        g.cov_q = matrix_from(c.at("cov_q"));
        g.n = c.value("n", g.n);
        g.m = c.value("m", g.m);
        g.replicates = c.value("replicates", g.replicates);
        cfg.cases.push_back(std::move(g));
      }
    }
    if (j.contains("data")) {
      const auto& d = j.at("data");
      cfg.data_path = resolve(base_dir, d.at("path").get<std::string>());
      const auto& s = d.at("schema");
      cfg.schema = s.is_string() ? load_schema(resolve(base_dir, s.get<std::string>()))
                                 : schema_from_json(s.dump());
      cfg.missing_token = d.value("missing_token", std::string());
    }
    if (j.contains("synthetic")) {
      const auto& s = j.at("synthetic");
      SyntheticSpec spec;
      spec.n = s.value("n", spec.n);
      spec.dim = s.value("dim", spec.dim);
      spec.rho = s.value("rho", spec.rho);
      if (s.contains("corr")) spec.corr = matrix_from(s.at("corr"));
      spec.margin = s.value("margin", spec.margin);
      spec.sigma = s.value("sigma", spec.sigma);
      if (s.contains("names")) spec.names = s.at("names").get<std::vector<std::string>>();
      cfg.synthetic = spec;
      std::vector<Column> cols;
      for (std::size_t k = 0; k < spec.dim; ++k)
        cols.push_back({spec.names.empty() ? "x" + std::to_string(k + 1) : spec.names[k],
                        ColumnKind::continuous});
      cfg.schema = Schema(std::move(cols));
    }
    if (j.contains("models")) {
      for (const auto& m : j.at("models")) {
        ModelSpec spec;
        if (m.is_string()) {
          spec.kind = model_kind_from_string(m.get<std::string>());
          spec.name = to_string(*spec.kind);
        } else {
          spec.name = m.at("name").get<std::string>();
          if (m.contains("external"))
            spec.external = resolve(base_dir, m.at("external").get<std::string>());
          else
            spec.kind = model_kind_from_string(m.value("kind", spec.name));
        }
        cfg.models.push_back(std::move(spec));
      }
    }
    cfg.n_sim = j.value("n_sim", cfg.n_sim);
    if (j.contains("subsampling")) {
      const auto& s = j.at("subsampling");
      cfg.subsampling.replicates = s.value("replicates", cfg.subsampling.replicates);
      cfg.subsampling.b_exponent = s.value("b_exponent", cfg.subsampling.b_exponent);
      cfg.subsampling.rate_exponent = s.value("rate_exponent", cfg.subsampling.rate_exponent);
      cfg.subsampling.alpha = s.value("alpha", cfg.subsampling.alpha);
      cfg.subsampling.max_failure_fraction =
          s.value("max_failure_fraction", cfg.subsampling.max_failure_fraction);
    }
    cfg.compute_ci = j.value("ci", cfg.compute_ci);
    if (j.contains("missing_fractions"))
      cfg.missing_fractions = j.at("missing_fractions").get<std::vector<double>>();
    if (j.contains("missing_columns"))
      cfg.missing_columns = j.at("missing_columns").get<std::vector<std::string>>();
    if (j.contains("observed")) cfg.observed = j.at("observed").get<std::vector<std::string>>();
    if (j.contains("estimators")) cfg.estimators = j.at("estimators").get<std::vector<std::string>>();
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("output_dir"))
      cfg.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    else
      cfg.output_dir = base_dir;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

namespace {

struct Split {
  Dataset train;
  Dataset test;
};

Dataset load_input(const ExperimentConfig& cfg) {
  Dataset ds = cfg.data_path
                   ? load_csv(*cfg.data_path, cfg.schema, CsvOptions{cfg.missing_token})
                   : generate_synthetic(*cfg.synthetic, rng::derive(cfg.seed, "synthetic"));
  return dedup_rows(complete_cases(ds));
}

Split split_input(const ExperimentConfig& cfg) {
  auto [train, test] = split_half(load_input(cfg), rng::derive(cfg.seed, "split"));
  return {std::move(train), std::move(test)};
}

std::uint64_t sample_seed(const ExperimentConfig& cfg, const ModelSpec& model) {
  return rng::derive(cfg.seed, "sample:" + model.name);
}

std::uint64_t ci_seed(const ExperimentConfig& cfg, const ModelSpec& model, const std::string& eval) {
  return rng::derive(cfg.seed, "ci:" + model.name + ":" + eval);
}

Dataset external_sample(const ExperimentConfig& cfg, const ModelSpec& model) {
  return dedup_rows(load_csv(model.external, cfg.schema, CsvOptions{cfg.missing_token}));
}

Dataset model_sample(const ExperimentConfig& cfg, const ModelSpec& model, const Dataset& train) {
  if (!model.kind) return external_sample(cfg, model);
  const FittedModel fitted = fit_model(train, *model.kind);
  return dedup_rows(sample_model(fitted, cfg.n_sim, sample_seed(cfg, model)));
}

KlEstimate evaluate(const ExperimentConfig& cfg, const Dataset& x, const Dataset& y,
                    std::uint64_t seed) {
  if (!cfg.compute_ci) return kld_est_mixed(x, y);
  SubsamplingConfig sc = cfg.subsampling;
  sc.seed = seed;
  return subsample_ci(x, y, mixed_kl_estimator(), sc);
}

ResultRow base_row(const ExperimentConfig& cfg, const ModelSpec& model, std::string evaluation,
                   std::optional<double> scenario, const Split& split) {
  ResultRow row;
  row.experiment = cfg.id;
  row.model = model.name;
  row.evaluation = std::move(evaluation);
  row.scenario = scenario;
  row.n_train = split.train.n_rows();
  row.n_test = split.test.n_rows();
  row.seed = cfg.seed;
  return row;
}

void fill(ResultRow& row, const KlEstimate& est, std::size_t m_effective) {
  row.kl_estimate = est.value;
  row.kl_clamped = std::max(0.0, est.value);
  row.ci_lower = est.ci ? est.ci->lower : kNaN;
  row.ci_upper = est.ci ? est.ci->upper : kNaN;
  row.m_effective = m_effective;
  row.failures = est.failures;
}

void fail(ResultRow& row, const std::string& status) {
  row.kl_estimate = row.ci_lower = row.ci_upper = row.kl_clamped = kNaN;
  row.status = status;
}

// Evaluates `sample` against each (evaluation name, x) pair, one row each.
void evaluate_rows(const ExperimentConfig& cfg, const ModelSpec& model, const Split& split,
                   std::optional<double> scenario, const Dataset* sample,
                   const std::string& sample_error,
                   const std::vector<std::pair<std::string, const Dataset*>>& targets,
                   std::vector<ResultRow>& out) {
  for (const auto& [eval, x] : targets) {
    ResultRow row = base_row(cfg, model, eval, scenario, split);
    if (!sample) {
      fail(row, "error: " + sample_error);
    } else {
      row.m_effective = sample->n_rows();
      try {
        fill(row, evaluate(cfg, *x, *sample, ci_seed(cfg, model, eval.starts_with("train") ? "train" : "test")),
             sample->n_rows());
      } catch (const Error& e) {
        fail(row, std::string("error: ") + e.what());
      }
    }
    out.push_back(std::move(row));
  }
}

std::optional<Dataset> try_sample(const ExperimentConfig& cfg, const ModelSpec& model,
                                  const Dataset& train, std::string& error) {
  try {
    return model_sample(cfg, model, train);
  } catch (const Error& e) {
    error = e.what();
    return std::nullopt;
  }
}

} // namespace

std::vector<ResultRow> run_eval(const ExperimentConfig& cfg) {
  const Split split = split_input(cfg);
  std::vector<ResultRow> rows;
  for (const auto& model : cfg.models) {
    std::string error;
    const auto sample = try_sample(cfg, model, split.train, error);
    evaluate_rows(cfg, model, split, std::nullopt, sample ? &*sample : nullptr, error,
                  {{"train", &split.train}, {"test", &split.test}}, rows);
  }
  return rows;
}

std::vector<ResultRow> run_missing(const ExperimentConfig& cfg) {
  const Split split = split_input(cfg);
  std::vector<std::string> columns = cfg.missing_columns;
  if (columns.empty())
    for (const auto& c : split.train.schema().columns()) columns.push_back(c.name);
  std::vector<ResultRow> rows;
  for (const auto& model : cfg.models) {
    for (double p : cfg.missing_fractions) {
      if (model.kind && *model.kind != ModelKind::gauss_cop) {
        ResultRow row = base_row(cfg, model, "test", p, split);
        fail(row, "skipped: only GaussCop and external samples run under missing data");
        rows.push_back(std::move(row));
        continue;
      }
      const Dataset train = inject_mcar(split.train, p, columns, rng::derive(cfg.seed, "mcar"));
      std::string error;
      const auto sample = try_sample(cfg, model, train, error);
      evaluate_rows(cfg, model, split, p, sample ? &*sample : nullptr, error,
                    {{"test", &split.test}}, rows);
    }
  }
  return rows;
}

std::vector<ResultRow> run_latent(const ExperimentConfig& cfg) {
  const Split split = split_input(cfg);
  const Schema& schema = split.train.schema();
  bool latent_discrete = false;
  for (const auto& c : schema.columns())
    if (std::find(cfg.observed.begin(), cfg.observed.end(), c.name) == cfg.observed.end() &&
        c.kind == ColumnKind::discrete)
      latent_discrete = true;
  const Dataset train_obs = marginalize_columns(split.train, cfg.observed);
  const Dataset test_obs = marginalize_columns(split.test, cfg.observed);
  const Split observed_split{train_obs, test_obs};

  std::vector<ResultRow> rows;
  for (const auto& model : cfg.models) {
    if (model.kind == ModelKind::gauss_dist && latent_discrete) {
      for (const char* eval : {"direct", "marginalized"}) {
        ResultRow row = base_row(cfg, model, eval, std::nullopt, observed_split);
        fail(row, "skipped: GaussDist cannot model discrete latent columns");
        rows.push_back(std::move(row));
      }
      continue;
    }
    std::string error;
    std::optional<Dataset> direct;
    std::optional<Dataset> marginal;
    if (model.kind) {
      direct = try_sample(cfg, model, train_obs, error);
      if (direct) {
        if (auto full = try_sample(cfg, model, split.train, error))
          marginal = dedup_rows(marginalize_columns(*full, cfg.observed));
      }
    } else {
      try {
        direct = dedup_rows(marginalize_columns(external_sample(cfg, model), cfg.observed));
        marginal = direct;
      } catch (const Error& e) {
        error = e.what();
      }
    }
    evaluate_rows(cfg, model, observed_split, std::nullopt, direct ? &*direct : nullptr, error,
                  {{"direct", &test_obs}}, rows);
    evaluate_rows(cfg, model, observed_split, std::nullopt, marginal ? &*marginal : nullptr, error,
                  {{"marginalized", &test_obs}}, rows);
  }
  return rows;
}

namespace {

Dataset with_continuous(const Dataset& ds, const PointMatrix& values) {
  return Dataset(ds.schema(), values, ds.discrete(), ds.missing(), ds.labels());
}

} // namespace

std::vector<ResultRow> run_scale(const ExperimentConfig& cfg) {
  const Split split = split_input(cfg);
  if (split.train.schema().n_continuous() == 0)
    throw ConfigError("scale experiment needs continuous columns");
  const auto margins = fit_margins(split.train);
  const Dataset test_uniform = dedup_rows(with_continuous(split.test, to_uniform(split.test, margins)));
  std::vector<ResultRow> rows;
  for (const auto& model : cfg.models) {
    std::string error;
    const auto sample = try_sample(cfg, model, split.train, error);
    evaluate_rows(cfg, model, split, std::nullopt, sample ? &*sample : nullptr, error,
                  {{"original", &split.test}}, rows);
    std::optional<Dataset> sample_uniform;
    if (sample) sample_uniform = dedup_rows(with_continuous(*sample, to_uniform(*sample, margins)));
    evaluate_rows(cfg, model, split, std::nullopt, sample_uniform ? &*sample_uniform : nullptr,
                  error, {{"uniform", &test_uniform}}, rows);
  }
  return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
  case Experiment::eval: return run_eval(cfg);
  case Experiment::missing: return run_missing(cfg);
  case Experiment::latent: return run_latent(cfg);
  case Experiment::scale: return run_scale(cfg);
  case Experiment::benchmark: break;
  }
  throw ConfigError("benchmark configs produce benchmark rows; use run_benchmark");
}

std::vector<BenchmarkRow> run_benchmark(const ExperimentConfig& cfg) {
  std::vector<BenchmarkRow> rows;
  for (const auto& c : cfg.cases) {
    const double truth = kld_gaussian_analytic(c.mu_p, c.cov_p, c.mu_q, c.cov_q);
    for (std::size_t r = 0; r < c.replicates; ++r) {
      const std::uint64_t base = rng::derive(rng::derive(cfg.seed, "bench:" + c.name), {r});
      const Dataset x = sample_gaussian(c.mu_p, c.cov_p, c.n, rng::derive(base, "x"));
      const Dataset y = sample_gaussian(c.mu_q, c.cov_q, c.m, rng::derive(base, "y"));
      for (const auto& name : cfg.estimators) {
        BenchmarkRow row;
        row.case_name = c.name;
        row.estimator = name;
        row.replicate = r;
        row.truth = truth;
        const Estimator est = name == "bc" ? Estimator([](const Dataset& a, const Dataset& b) {
          return kld_est_bc(a.continuous(), b.continuous()).value;
        })
                                           : Estimator([](const Dataset& a, const Dataset& b) {
                                               return kld_est_nn(a.continuous(), b.continuous(), 1).value;
                                             });
        try {
          if (cfg.compute_ci) {
            SubsamplingConfig sc = cfg.subsampling;
            sc.seed = rng::derive(base, "ci:" + name);
            const KlEstimate k = subsample_ci(x, y, est, sc);
            row.estimate = k.value;
            row.ci_lower = k.ci->lower;
            row.ci_upper = k.ci->upper;
            row.covered = k.ci->contains(truth);
            row.failures = k.failures;
          } else {
            row.estimate = est(x, y);
            row.ci_lower = row.ci_upper = kNaN;
          }
        } catch (const Error& e) {
          row.estimate = row.ci_lower = row.ci_upper = kNaN;
          row.status = std::string("error: ") + e.what();
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<BenchmarkSummary> summarize(const std::vector<BenchmarkRow>& rows) {
  std::vector<BenchmarkSummary> out;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : rows) {
    const std::pair key{r.case_name, r.estimator};
    if (std::find(order.begin(), order.end(), key) == order.end()) order.push_back(key);
  }
  for (const auto& [case_name, estimator] : order) {
    BenchmarkSummary s;
    s.case_name = case_name;
    s.estimator = estimator;
    std::vector<double> estimates;
    std::vector<double> widths;
    std::size_t covered = 0;
    for (const auto& r : rows) {
      if (r.case_name != case_name || r.estimator != estimator) continue;
      ++s.replicates;
      s.truth = r.truth;
      if (r.status != "ok") continue;
      ++s.succeeded;
      estimates.push_back(r.estimate);
      if (!std::isnan(r.ci_lower)) widths.push_back(r.ci_upper - r.ci_lower);
      if (r.covered) ++covered;
    }
    s.median_estimate = estimates.empty() ? kNaN : stats::quantile(estimates, 0.5);
    s.median_ci_width = widths.empty() ? kNaN : stats::quantile(widths, 0.5);
    s.coverage = s.replicates ? static_cast<double>(covered) / static_cast<double>(s.replicates) : kNaN;
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

} // namespace

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::string out = "experiment,model,evaluation,scenario,kl_estimate,ci_lower,ci_upper,kl_clamped,"
                    "n_train,n_test,m_effective,failures,seed,status\n";
  for (const auto& r : rows) {
    out += field(r.experiment) + ',' + field(r.model) + ',' + field(r.evaluation) + ',' +
           (r.scenario ? num(*r.scenario) : "") + ',' + num(r.kl_estimate) + ',' + num(r.ci_lower) +
           ',' + num(r.ci_upper) + ',' + num(r.kl_clamped) + ',' + std::to_string(r.n_train) + ',' +
           std::to_string(r.n_test) + ',' + std::to_string(r.m_effective) + ',' +
           std::to_string(r.failures) + ',' + std::to_string(r.seed) + ',' + field(r.status) + '\n';
  }
  return out;
}

std::string benchmark_rows_to_csv(const std::vector<BenchmarkRow>& rows) {
  std::string out = "case,estimator,replicate,estimate,ci_lower,ci_upper,truth,covered,failures,status\n";
  for (const auto& r : rows)
    out += field(r.case_name) + ',' + r.estimator + ',' + std::to_string(r.replicate) + ',' +
           num(r.estimate) + ',' + num(r.ci_lower) + ',' + num(r.ci_upper) + ',' + num(r.truth) +
           ',' + (r.covered ? "1" : "0") + ',' + std::to_string(r.failures) + ',' + field(r.status) +
           '\n';
  return out;
}

std::string summary_to_csv(const std::vector<BenchmarkSummary>& rows) {
  std::string out = "case,estimator,replicates,succeeded,truth,median_estimate,coverage,median_ci_width\n";
  for (const auto& s : rows)
    out += field(s.case_name) + ',' + s.estimator + ',' + std::to_string(s.replicates) + ',' +
           std::to_string(s.succeeded) + ',' + num(s.truth) + ',' + num(s.median_estimate) + ',' +
           num(s.coverage) + ',' + num(s.median_ci_width) + '\n';
  return out;
}

std::vector<std::filesystem::path> run_and_write(const ExperimentConfig& cfg,
                                                 const std::string& config_echo,
                                                 bool record_timings) {
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(cfg.output_dir);
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::string& name, const std::string& content) {
    const auto path = cfg.output_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
    written.push_back(path);
  };
  std::size_t n_rows = 0;
  std::size_t n_failed = 0;
  if (cfg.experiment == Experiment::benchmark) {
    const auto rows = run_benchmark(cfg);
    n_rows = rows.size();
    for (const auto& r : rows) n_failed += r.status != "ok";
    write(cfg.id + ".csv", benchmark_rows_to_csv(rows));
    write(cfg.id + "_summary.csv", summary_to_csv(summarize(rows)));
  } else {
    const auto rows = run_experiment(cfg);
    n_rows = rows.size();
    for (const auto& r : rows) n_failed += r.status.starts_with("error");
    write(cfg.id + ".csv", rows_to_csv(rows));
  }
  json manifest;
  manifest["tool"] = "covkl";
  manifest["version"] = kVersion;
  manifest["id"] = cfg.id;
  manifest["experiment"] = to_string(cfg.experiment);
  manifest["seed"] = cfg.seed;
  try {
    manifest["config"] = json::parse(config_echo);
  } catch (const json::exception&) {
    manifest["config"] = config_echo;
  }
  json outputs = json::array();
  for (const auto& p : written) outputs.push_back(p.filename().string());
  manifest["outputs"] = outputs;
  manifest["rows"] = n_rows;
  manifest["failed_rows"] = n_failed;
  if (record_timings) {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    manifest["timings_ms"] = {{"total", ms}};
  }
  write(cfg.id + "_manifest.json", manifest.dump(2) + "\n");
  return written;
}

} // namespace covkl::harness
