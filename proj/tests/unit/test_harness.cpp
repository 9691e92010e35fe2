#include "covkl/error.hpp"
#include "covkl/harness.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace covkl;
using namespace covkl::harness;

namespace {

ExperimentConfig synthetic_config(const std::string& experiment, std::size_t n, std::size_t dim,
                                  const std::string& models, const std::string& extra = "") {
  const std::string text = R"({"id": "t", "experiment": ")" + experiment + R"(",
    "synthetic": {"n": )" + std::to_string(n) + R"(, "dim": )" + std::to_string(dim) + R"(, "rho": 0.6},
    "models": )" + models + extra + R"(, "n_sim": 1500,
    "subsampling": {"replicates": 60}, "seed": 5})";
  return parse_config(text);
}

void check_row_invariants(const ResultRow& r) {
  if (!r.ok()) return;
  CHECK(r.kl_clamped == std::max(0.0, r.kl_estimate));
  CHECK(r.kl_clamped >= 0.0);
  if (!std::isnan(r.ci_lower)) CHECK(r.ci_lower <= r.ci_upper);
}

} // namespace

TEST_CASE("config parsing and validation") {
  const ExperimentConfig cfg = synthetic_config("eval", 100, 2, R"(["GaussCop", {"name": "cop2", "kind": "indepcop"}])");
  CHECK(cfg.models.size() == 2);
  CHECK(cfg.models[1].kind == ModelKind::indep_cop);
  CHECK(cfg.subsampling.replicates == 60);
  CHECK(cfg.schema.size() == 2);
  CHECK(cfg.n_sim == 1500);

  CHECK_THROWS_AS(parse_config(R"({"experiment": "bogus", "synthetic": {}, "models": ["GaussCop"]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "eval", "models": ["GaussCop"]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"synthetic": {}, "models": []})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"synthetic": {}, "models": ["GaussCop"], "missing_fractions": [0, 1.0]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "latent", "synthetic": {}, "models": ["GaussCop"]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"synthetic": {}, "models": ["GaussCop", "GaussCop"]})"), ConfigError);
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"synthetic": {}, "models": ["GaussCop"], "subsampling": {"alpha": 2}})"), ConfigError);
}

TEST_CASE("data-file configs resolve paths relative to the config") {
  const auto dir = testing::scratch("harness_paths");
  testing::write_file(dir / "schema.json", R"([{"name": "a", "kind": "continuous"}, {"name": "g", "kind": "discrete"}])");
  testing::write_file(dir / "d.csv", "a,g\n1,x\n");
  const ExperimentConfig cfg = parse_config(
      R"({"data": {"path": "d.csv", "schema": "schema.json"}, "models": ["IndepCop"], "missing_columns": ["a"]})", dir);
  CHECK(*cfg.data_path == dir / "d.csv");
  CHECK(cfg.schema.n_discrete() == 1);
  CHECK(cfg.output_dir == dir);
  CHECK_THROWS_AS(parse_config(R"({"data": {"path": "d.csv", "schema": "schema.json"}, "models": ["IndepCop"],
                                   "missing_columns": ["zzz"]})", dir), ConfigError);
}

TEST_CASE("eval: one row per model and split") {
  const auto rows = run_eval(synthetic_config("eval", 400, 2, R"(["GaussDist", "IndepCop", "GaussCop"])"));
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].model == "GaussDist");
  CHECK(rows[0].evaluation == "train");
  CHECK(rows[1].evaluation == "test");
  for (const auto& r : rows) {
    CHECK(r.ok());
    CHECK(r.n_train == 200);
    CHECK(r.n_test == 200);
    CHECK(r.m_effective == 1500);
    CHECK(r.seed == 5);
    check_row_invariants(r);
  }
}

TEST_CASE("missing: p = 0 reproduces the eval test row; other models are skipped") {
  ExperimentConfig cfg = synthetic_config("missing", 400, 2, R"(["GaussCop", "IndepCop"])");
  cfg.missing_fractions = {0.0, 0.3};
  const auto rows = run_missing(cfg);
  REQUIRE(rows.size() == 4);
  CHECK(*rows[0].scenario == 0.0);
  CHECK(*rows[1].scenario == 0.3);
  CHECK(rows[2].status.starts_with("skipped"));
  cfg.experiment = Experiment::eval;
  const auto eval = run_eval(cfg);
  CHECK(rows[0].kl_estimate == eval[1].kl_estimate);
  CHECK(rows[0].ci_lower == eval[1].ci_lower);
  CHECK(rows[0].ci_upper == eval[1].ci_upper);
}

TEST_CASE("latent: keeping every column gives identical rows") {
  const ExperimentConfig cfg =
      synthetic_config("latent", 400, 3, R"(["GaussCop"])", R"(, "observed": ["x1", "x2", "x3"])");
  const auto rows = run_latent(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].evaluation == "direct");
  CHECK(rows[1].evaluation == "marginalized");
  CHECK(rows[0].kl_estimate == rows[1].kl_estimate);
  CHECK(rows[0].ci_lower == rows[1].ci_lower);
  CHECK(rows[0].ci_upper == rows[1].ci_upper);
}

TEST_CASE("latent: independent latent column barely matters") {
  const auto dir = testing::scratch("harness_latent");
  std::mt19937_64 eng(3);
  std::normal_distribution<double> z;
  std::string text = "a,b,c\n";
  for (int i = 0; i < 1200; ++i) {
    const double a = z(eng);
    text += std::to_string(a) + "," + std::to_string(0.7 * a + z(eng)) + "," + std::to_string(z(eng)) + "\n";
  }
  testing::write_file(dir / "d.csv", text);
  testing::write_file(dir / "s.json", R"([{"name":"a","kind":"continuous"},{"name":"b","kind":"continuous"},{"name":"c","kind":"continuous"}])");
  const ExperimentConfig cfg = parse_config(R"({"experiment": "latent", "data": {"path": "d.csv", "schema": "s.json"},
      "models": ["GaussCop"], "observed": ["a", "b"], "n_sim": 3000, "subsampling": {"replicates": 200}, "seed": 2})", dir);
  const auto rows = run_latent(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].ok());
  CHECK(rows[1].ok());
  CHECK(rows[0].kl_estimate >= rows[1].ci_lower);
  CHECK(rows[0].kl_estimate <= rows[1].ci_upper);
  CHECK(rows[1].kl_estimate >= rows[0].ci_lower);
  CHECK(rows[1].kl_estimate <= rows[0].ci_upper);
}

TEST_CASE("latent: GaussDist skipped when a discrete column is latent") {
  const auto dir = testing::scratch("harness_latent_discrete");
  std::string text = "a,b,g\n";
  std::mt19937_64 eng(4);
  std::normal_distribution<double> z;
  for (int i = 0; i < 200; ++i) text += std::to_string(z(eng)) + "," + std::to_string(z(eng)) + "," + (i % 2 ? "u" : "v") + "\n";
  testing::write_file(dir / "d.csv", text);
  const ExperimentConfig cfg = parse_config(R"({"experiment": "latent", "data": {"path": "d.csv",
      "schema": [{"name":"a","kind":"continuous"},{"name":"b","kind":"continuous"},{"name":"g","kind":"discrete"}]},
      "models": ["GaussDist", "IndepCop"], "observed": ["a", "b"], "n_sim": 500, "ci": false})", dir);
  const auto rows = run_latent(cfg);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].status.starts_with("skipped"));
  CHECK(rows[1].status.starts_with("skipped"));
  CHECK(rows[2].ok());
  CHECK(rows[3].ok());
}

TEST_CASE("scale: near-uniform data gives nearly identical estimates on both scales") {
  const ExperimentConfig cfg = parse_config(R"({"experiment": "scale", "synthetic": {"n": 3000, "dim": 2, "margin": "uniform"},
      "models": ["GaussCop"], "n_sim": 3000, "ci": false, "seed": 3})");
  const auto rows = run_scale(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].evaluation == "original");
  CHECK(rows[1].evaluation == "uniform");
  CHECK(std::abs(rows[0].kl_estimate - rows[1].kl_estimate) < 0.05);
}

TEST_CASE("scale: heavy-tailed margins give finite estimates on both scales") {
  const ExperimentConfig cfg = parse_config(R"({"experiment": "scale",
      "synthetic": {"n": 1000, "dim": 2, "margin": "lognormal", "sigma": 1.5, "rho": 0.5},
      "models": ["GaussCop"], "n_sim": 2000, "ci": false, "seed": 4})");
  for (const auto& r : run_scale(cfg)) {
    CHECK(r.ok());
    CHECK(std::isfinite(r.kl_estimate));
  }
}

TEST_CASE("external sample from the same distribution: CI covers zero") {
  const auto dir = testing::scratch("harness_external");
  SyntheticSpec spec;
  spec.n = 3000;
  spec.dim = 2;
  spec.rho = 0.5;
  save_csv(generate_synthetic(spec, 999), dir / "sample.csv");
  const ExperimentConfig cfg = parse_config(R"({"experiment": "eval", "synthetic": {"n": 2000, "dim": 2, "rho": 0.5},
      "models": [{"name": "same", "external": "sample.csv"}], "subsampling": {"replicates": 300}, "seed": 8})", dir);
  const auto rows = run_eval(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].ok());
  CHECK(rows[1].ci_lower <= 0.0);
  CHECK(rows[1].ci_upper >= 0.0);
}

TEST_CASE("row errors are recorded, not thrown") {
  const auto dir = testing::scratch("harness_errors");
  testing::write_file(dir / "bad.csv", "x1,zz\n1,2\n");
  const ExperimentConfig cfg = parse_config(R"({"synthetic": {"n": 100, "dim": 2},
      "models": [{"name": "ext", "external": "bad.csv"}, "IndepCop"], "ci": false})", dir);
  const auto rows = run_eval(cfg);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].status.starts_with("error"));
  CHECK(std::isnan(rows[0].kl_estimate));
  CHECK(rows[2].ok());
}

TEST_CASE("benchmark rows carry the analytic truth") {
  const ExperimentConfig cfg = parse_config(R"({"id": "b", "cases": [{"name": "shift", "mu_p": [0], "cov_p": [[1]],
      "mu_q": [1], "cov_q": [[1]], "n": 300, "m": 300, "replicates": 3}], "subsampling": {"replicates": 50}})");
  CHECK(cfg.experiment == Experiment::benchmark);
  const auto rows = run_benchmark(cfg);
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) {
    CHECK(r.truth == doctest::Approx(0.5));
    CHECK(r.status == "ok");
    CHECK(r.covered == (r.ci_lower <= 0.5 && 0.5 <= r.ci_upper));
  }
  const auto summary = summarize(rows);
  REQUIRE(summary.size() == 2);
  CHECK(summary[0].estimator == "bc");
  CHECK(summary[1].estimator == "nn");
  CHECK(summary[0].replicates == 3);
  CHECK_THROWS_AS(parse_config(R"({"cases": [{"name": "bad", "mu_p": [0, 0], "cov_p": [[1, 2], [2, 1]],
      "mu_q": [0, 0], "cov_q": [[1, 0], [0, 1]]}]})"), ConfigError);
}

TEST_CASE("CSV output: blank for missing numbers, 17 significant digits") {
  ResultRow r;
  r.experiment = "e";
  r.model = "m";
  r.evaluation = "test";
  r.scenario = 0.1;
  r.kl_estimate = 1.0 / 3.0;
  r.ci_lower = std::nan("");
  r.ci_upper = std::nan("");
  r.kl_clamped = 1.0 / 3.0;
  r.status = "error: a, b";
  const std::string csv = rows_to_csv({r});
  CHECK(csv.find("e,m,test,0.10000000000000001,0.33333333333333331,,,0.33333333333333331,") != std::string::npos);
  CHECK(csv.find("\"error: a, b\"") != std::string::npos);
}

TEST_CASE("run_and_write is byte-for-byte reproducible") {
  const auto dir = testing::scratch("harness_determinism");
  const std::string text = R"({"id": "det", "experiment": "eval", "synthetic": {"n": 300, "dim": 2, "rho": 0.4},
      "models": ["IndepCop", "GaussCop"], "n_sim": 800, "subsampling": {"replicates": 40}, "seed": 12, "output_dir": "out"})";
  ExperimentConfig cfg = parse_config(text, dir);
  const auto first = run_and_write(cfg, text);
  const std::string csv1 = testing::read_file(first[0]);
  const std::string man1 = testing::read_file(dir / "out" / "det_manifest.json");
  run_and_write(cfg, text);
  CHECK(testing::read_file(first[0]) == csv1);
  CHECK(testing::read_file(dir / "out" / "det_manifest.json") == man1);
  CHECK(man1.find("timings_ms") == std::string::npos);
}
