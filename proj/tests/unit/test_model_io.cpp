#include "covkl/error.hpp"
#include "covkl/model_io.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace covkl;

TEST_CASE("schema files") {
  const Schema s = schema_from_json(R"([{"name": "age", "kind": "continuous"}, {"name": "sex", "kind": "discrete"}])");
  CHECK(s.size() == 2);
  CHECK(s[1].kind == ColumnKind::discrete);
  CHECK(schema_from_json(schema_to_json(s)) == s);
  CHECK_THROWS_AS(schema_from_json(R"([{"name": "age", "kind": "ordinal"}])"), ConfigError);
  CHECK_THROWS_AS(schema_from_json(R"({"name": "age"})"), ConfigError);
  CHECK_THROWS_AS(schema_from_json("[{"), ConfigError);
  CHECK_THROWS_AS(schema_from_json("[]"), ConfigError);
}

TEST_CASE("saved models reload bit-identically and sample the same") {
  const Schema s({{"v", ColumnKind::continuous}, {"w", ColumnKind::continuous}, {"g", ColumnKind::discrete}});
  std::string text = "v,w,g\n";
  const PointMatrix z = testing::std_normal(200, 2, 3);
  for (Eigen::Index i = 0; i < 200; ++i) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s\n", z(i, 0), 0.3 * z(i, 0) + z(i, 1), i % 3 ? "p" : "q");
    text += buf;
  }
  const Dataset ds = parse_csv(text, s);
  for (ModelKind k : {ModelKind::indep_cop, ModelKind::gauss_cop}) {
    const FittedModel m = fit_model(ds, k);
    const std::string json = model_to_json(m);
    const FittedModel back = model_from_json(json);
    CHECK(model_to_json(back) == json);
    CHECK(to_csv(sample_model(back, 300, 4)) == to_csv(sample_model(m, 300, 4)));
  }
  const Dataset cont = marginalize_columns(ds, {"v", "w"});
  const FittedModel g = fit_model(cont, ModelKind::gauss_dist);
  const auto dir = testing::scratch("model_io");
  save_model(g, dir / "g.json");
  const FittedModel back = load_model(dir / "g.json");
  CHECK(std::get<GaussDistFit>(*back.shared()).cov == std::get<GaussDistFit>(*g.shared()).cov);
  CHECK(to_csv(sample_model(back, 100, 1)) == to_csv(sample_model(g, 100, 1)));
}

TEST_CASE("malformed model documents") {
  CHECK_THROWS_AS(model_from_json("{}"), ConfigError);
  CHECK_THROWS_AS(model_from_json(R"({"format": "covkl-model", "version": 1, "kind": "GaussDist",
    "schema": [{"name": "a", "kind": "continuous"}], "labels": [], "continuous": null, "discrete": null})"),
                  ConfigError);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), ConfigError);
}
