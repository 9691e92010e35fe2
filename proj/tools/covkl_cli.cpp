// covkl command line: estimate, fit-sample, experiment, benchmark.

#include "covkl/error.hpp"
#include "covkl/harness.hpp"
#include "covkl/kld.hpp"
#include "covkl/mixed.hpp"
#include "covkl/model_io.hpp"
#include "covkl/models.hpp"
#include "covkl/uq.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace covkl;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Without a schema file every header column is continuous.
Schema schema_or_header(const std::string& schema_path, const std::filesystem::path& csv) {
  if (!schema_path.empty()) return load_schema(schema_path);
  std::ifstream in(csv);
  if (!in) throw ConfigError("cannot open '" + csv.string() + "'");
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::vector<Column> cols;
  std::stringstream ss(header);
  for (std::string name; std::getline(ss, name, ',');) {
    if (name.size() >= 2 && name.front() == '"' && name.back() == '"')
      name = name.substr(1, name.size() - 2);
    cols.push_back({name, ColumnKind::continuous});
  }
  return Schema(std::move(cols));
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + out + "'");
  f << text;
}

struct EstimateArgs {
  std::string x, y, schema, out, missing_token, estimator = "mixed";
  bool ci = false;
  double alpha = 0.05;
  std::size_t s = 1000;
  double b_exp = 2.0 / 3.0;
  std::uint64_t seed = 1;
  std::size_t k = 1;
};

int run_estimate(const EstimateArgs& a) {
  const Schema schema = schema_or_header(a.schema, a.x);
  const CsvOptions opts{a.missing_token};
  const Dataset x = load_csv(a.x, schema, opts);
  const Dataset y = load_csv(a.y, schema, opts);
  Estimator est;
  if (a.estimator == "mixed" || a.estimator == "bc") {
    est = mixed_kl_estimator();
  } else if (a.estimator == "nn") {
    if (schema.n_discrete() > 0) throw ConfigError("estimator 'nn' needs purely continuous data");
    const std::size_t k = a.k;
    est = [k](const Dataset& p, const Dataset& q) {
      return kld_est_nn(p.continuous(), q.continuous(), k).value;
    };
  } else {
    throw ConfigError("unknown estimator '" + a.estimator + "'");
  }
  KlEstimate r;
  if (a.ci) {
    SubsamplingConfig cfg;
    cfg.replicates = a.s;
    cfg.alpha = a.alpha;
    cfg.b_exponent = a.b_exp;
    cfg.seed = a.seed;
    cfg.validate();
    r = subsample_ci(x, y, est, cfg);
  } else {
    r.value = est(x, y);
  }
  std::string text = "estimate,ci_lower,ci_upper,clamped,n,m,failures\n";
  text += num(r.value) + ',' + (r.ci ? num(r.ci->lower) : "") + ',' + (r.ci ? num(r.ci->upper) : "") +
          ',' + num(std::max(0.0, r.value)) + ',' + std::to_string(x.n_rows()) + ',' +
          std::to_string(y.n_rows()) + ',' + std::to_string(r.failures) + '\n';
  emit(text, a.out);
  return 0;
}

struct FitArgs {
  std::string data, schema, model = "GaussCop", out, save_model, missing_token;
  std::size_t m = 10000;
  std::uint64_t seed = 1;
};

int run_fit_sample(const FitArgs& a) {
  const Schema schema = schema_or_header(a.schema, a.data);
  const CsvOptions opts{a.missing_token};
  const Dataset data = load_csv(a.data, schema, opts);
  const FittedModel fitted = fit_model(data, model_kind_from_string(a.model));
  if (!a.save_model.empty()) save_model(fitted, a.save_model);
  emit(to_csv(sample_model(fitted, a.m, a.seed), opts), a.out);
  return 0;
}

int run_config(const std::string& path, const std::string& out_dir, bool timings, bool benchmark) {
  const std::string text = read_file(path);
  harness::ExperimentConfig cfg =
      harness::parse_config(text, std::filesystem::path(path).parent_path());
  if (benchmark != (cfg.experiment == harness::Experiment::benchmark))
    throw ConfigError(benchmark ? "not a benchmark spec (no 'cases')"
                                : "benchmark specs run with the 'benchmark' subcommand");
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  for (const auto& p : harness::run_and_write(cfg, text, timings)) std::cout << p.string() << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-based KL divergence estimation and covariate model evaluation"};
  app.require_subcommand(1);

  EstimateArgs ea;
  auto* est = app.add_subcommand("estimate", "Estimate KL(p || q) from samples x ~ p and y ~ q");
  est->add_option("x", ea.x, "Sample from p (CSV)")->required();
  est->add_option("y", ea.y, "Sample from q (CSV)")->required();
  est->add_option("--schema", ea.schema, "Schema JSON; default treats every column as continuous");
  est->add_flag("--ci", ea.ci, "Subsampling confidence interval");
  est->add_option("--alpha", ea.alpha, "1 - confidence level")->capture_default_str();
  est->add_option("--s", ea.s, "Subsampling replicates")->capture_default_str();
  est->add_option("--b-exp", ea.b_exp, "Subsample size exponent")->capture_default_str();
  est->add_option("--seed", ea.seed, "Seed for subsampling")->capture_default_str();
  est->add_option("--estimator", ea.estimator, "mixed (bias-corrected), bc, or nn")->capture_default_str();
  est->add_option("--k", ea.k, "Neighbour order for nn")->capture_default_str();
  est->add_option("--missing-token", ea.missing_token, "Token marking a missing cell");
  est->add_option("--out", ea.out, "Write the result CSV here instead of stdout");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit-sample", "Fit a covariate model and draw a sample");
  fit->add_option("data", fa.data, "Training data (CSV)")->required();
  fit->add_option("--schema", fa.schema, "Schema JSON; default treats every column as continuous");
  fit->add_option("--model", fa.model, "GaussDist, IndepCop or GaussCop")->capture_default_str();
  fit->add_option("--m", fa.m, "Sample size")->capture_default_str();
  fit->add_option("--seed", fa.seed, "Sampling seed")->capture_default_str();
  fit->add_option("--out", fa.out, "Sample CSV; stdout when omitted");
  fit->add_option("--save-model", fa.save_model, "Also write the fitted model as JSON");
  fit->add_option("--missing-token", fa.missing_token, "Token marking a missing cell");

  std::string exp_path, exp_out, bench_path, bench_out;
  bool exp_timings = false, bench_timings = false;
  auto* exp = app.add_subcommand("experiment", "Run an experiment config");
  exp->add_option("config", exp_path, "Experiment JSON")->required();
  exp->add_option("--out-dir", exp_out, "Override the output directory");
  exp->add_flag("--timings", exp_timings, "Record wall-clock timings in the manifest");
  auto* bench = app.add_subcommand("benchmark", "Run a Gaussian benchmark spec");
  bench->add_option("spec", bench_path, "Benchmark JSON")->required();
  bench->add_option("--out-dir", bench_out, "Override the output directory");
  bench->add_flag("--timings", bench_timings, "Record wall-clock timings in the manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*est) return run_estimate(ea);
    if (*fit) return run_fit_sample(fa);
    if (*exp) return run_config(exp_path, exp_out, exp_timings, false);
    if (*bench) return run_config(bench_path, bench_out, bench_timings, true);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "estimation failed: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
