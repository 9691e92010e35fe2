#include "covkl/error.hpp"
#include "covkl/models.hpp"
#include "covkl/stats.hpp"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

using namespace covkl;

namespace {

Eigen::MatrixXd equicorr(Eigen::Index d, double rho) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(d, d, rho);
  c.diagonal().setOnes();
  return c;
}

// Gaussian-copula data with exponential-of-normal margins.
Dataset copula_data(std::size_t n, Eigen::Index d, double rho, unsigned seed) {
  PointMatrix z = testing::gaussian(n, Eigen::VectorXd::Zero(d), equicorr(d, rho), seed);
  return Dataset::from_continuous(z.array().exp().matrix());
}

double sample_corr(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = stats::mean(a), mb = stats::mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

} // namespace

TEST_CASE("margin CDF on five points") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  const MarginModel m = MarginModel::fit(v);
  CHECK(m.cdf(3) > 0.45);
  CHECK(m.cdf(3) < 0.55);
  CHECK(m.cdf(3) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("margin CDF is strictly increasing") {
  const PointMatrix x = testing::std_normal(300, 1, 1);
  const MarginModel m = MarginModel::fit(testing::col(x, 0));
  std::mt19937_64 eng(2);
  std::uniform_real_distribution<double> u(-4, 4);
  for (int t = 0; t < 100; ++t) {
    double a = u(eng), b = u(eng);
    if (a > b) std::swap(a, b);
    if (a == b) continue;
    CHECK(m.cdf(a) < m.cdf(b));
  }
}

TEST_CASE("missing mask hides values exactly") {
  const std::vector<double> v{3.0, 9.0, 1.0, -2.0, 100.0, 4.0, 5.5};
  const bool mask[] = {false, true, false, false, true, false, false};
  const MarginModel a = MarginModel::fit(v, std::span<const bool>(mask, 7));
  const MarginModel b = MarginModel::fit(std::vector<double>{3.0, 1.0, -2.0, 4.0, 5.5});
  CHECK(a.bandwidth() == b.bandwidth());
  CHECK(a.values() == b.values());
  CHECK(a.cdf(2.2) == b.cdf(2.2));
  CHECK_THROWS_AS(MarginModel::fit(std::vector<double>{1, 2, 3}), FitError);
  CHECK_THROWS_AS(MarginModel::fit(std::vector<double>{2, 2, 2, 2, 2}), FitError);
}

TEST_CASE("Silverman bandwidth") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  const double sd = std::sqrt(2.5);
  const double iqr = 2.0;
  CHECK(silverman_bandwidth(v) == doctest::Approx(0.9 * std::min(sd, iqr / 1.34) * std::pow(5.0, -0.2)));
  const std::vector<double> tied{0, 0, 0, 0, 0, 0, 0, 10};
  CHECK(silverman_bandwidth(tied) == doctest::Approx(0.9 * stats::sample_sd(tied) * std::pow(8.0, -0.2)));
}

TEST_CASE("quantile inverts the CDF") {
  const PointMatrix x = testing::gaussian(800, Eigen::VectorXd::Constant(1, 3.0), Eigen::MatrixXd::Identity(1, 1) * 4, 3);
  const MarginModel m = MarginModel::fit(testing::col(x, 0));
  for (double v : m.values()) CHECK(std::abs(m.quantile(m.cdf(v)) - v) < 1e-8);
  CHECK(std::abs(MarginModel::fit(std::vector<double>{-1, 0, 1, -0.5, 0.5}).quantile(0.5)) < 1e-9);
  const double low = m.quantile(m.u_min());
  CHECK(std::isfinite(low));
  CHECK(low < m.values().front());
  CHECK(std::isfinite(m.quantile(1e-300)));
  CHECK(std::isfinite(m.quantile(1 - 0x1.0p-53)));
  CHECK_THROWS_AS(m.quantile(0.0), ConfigError);
  CHECK_THROWS_AS(m.quantile(1.0), ConfigError);
}

TEST_CASE("uniform transform of the training data") {
  const Dataset ds = Dataset::from_continuous(testing::gaussian(1000, Eigen::VectorXd::Zero(2), equicorr(2, 0.5), 4));
  const auto margins = fit_margins(ds);
  const PointMatrix u = to_uniform(ds, margins);
  for (Eigen::Index c = 0; c < 2; ++c) CHECK(testing::ks_uniform(testing::col(u, c)) < 0.05);

  const auto huge = testing::column({1e9});
  const Dataset far = Dataset::from_continuous(huge);
  const std::vector<MarginModel> one{margins[0]};
  CHECK(to_uniform(far, one)(0, 0) == margins[0].u_max());
}

TEST_CASE("shifted inputs with shifted margins give identical output") {
  const std::vector<double> v{0.5, 1.5, 2.0, 7.25, 3.0, 4.5};
  std::vector<double> w = v;
  for (double& t : w) t += 8.0;
  const MarginModel a = MarginModel::fit(v);
  const MarginModel b(w, a.bandwidth());
  for (double t : {0.0, 1.0, 2.5, 6.0}) CHECK(a.to_uniform(t) == doctest::Approx(b.to_uniform(t + 8.0)).epsilon(1e-13));
}

TEST_CASE("probability integral transform of fresh margin samples") {
  int pass = 0;
  for (unsigned s = 0; s < 20; ++s) {
    const Dataset ds = copula_data(500, 1, 0.0, 100 + s);
    const FittedModel m = fit_model(ds, ModelKind::indep_cop);
    const auto& margin = std::get<IndepCopFit>(*m.shared()).margins[0];
    const Dataset sim = sample_model(m, 5000, s);
    std::vector<double> u;
    for (Eigen::Index i = 0; i < sim.continuous().rows(); ++i) u.push_back(margin.cdf(sim.continuous()(i, 0)));
    pass += testing::ks_uniform(u) < 1.63 / std::sqrt(5000.0); // alpha = 0.01
  }
  CHECK(pass > 10);
}

TEST_CASE("GaussDist fit") {
  Eigen::VectorXd mu(2);
  mu << 1.0, -2.0;
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 0.6, 0.6, 1.0;
  const Dataset ds = Dataset::from_continuous(testing::gaussian(5000, mu, cov, 5));
  const FittedModel m = fit_model(ds, ModelKind::gauss_dist);
  const auto& g = std::get<GaussDistFit>(*m.shared());
  for (Eigen::Index j = 0; j < 2; ++j) CHECK(std::abs(g.mean(j) - mu(j)) < 3 * std::sqrt(cov(j, j) / 5000));

  // the fit is exactly the empirical mean and covariance
  const PointMatrix& x = ds.continuous();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd emp = centered.transpose() * centered / 4999.0;
  CHECK((g.mean.transpose() - mean).norm() < 1e-12);
  CHECK((g.cov - emp).norm() < 1e-10);

  const Dataset sim = sample_model(m, 20000, 1);
  const Eigen::RowVectorXd sm = sim.continuous().colwise().mean();
  CHECK((sm - mean).norm() < 0.05);

  CHECK_THROWS_AS(fit_model(Dataset::from_continuous(testing::std_normal(2, 2, 1)), ModelKind::gauss_dist), FitError);
  CHECK_THROWS_AS(fit_model(Dataset::from_continuous(testing::std_normal(1, 1, 1)), ModelKind::gauss_dist), FitError);
}

TEST_CASE("normal-score correlation") {
  const Dataset indep = copula_data(2000, 3, 0.0, 6);
  const Eigen::MatrixXd c = pairwise_normal_score_correlation(indep, fit_margins(indep));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) CHECK(std::abs(c(a, b) - (a == b ? 1.0 : 0.0)) < 0.05);

  // complete data: pairwise-complete equals the full-sample correlation of the scores
  const Dataset dep = copula_data(500, 2, 0.6, 7);
  const auto margins = fit_margins(dep);
  const PointMatrix u = to_uniform(dep, margins);
  std::vector<double> z0, z1;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    z0.push_back(stats::normal_quantile(u(i, 0)));
    z1.push_back(stats::normal_quantile(u(i, 1)));
  }
  CHECK(pairwise_normal_score_correlation(dep, margins)(0, 1) == doctest::Approx(sample_corr(z0, z1)).epsilon(1e-12));
}

TEST_CASE("GaussCop correlation under 30% MCAR") {
  std::vector<double> fitted;
  for (unsigned s = 0; s < 20; ++s) {
    const Dataset ds = inject_mcar(copula_data(2000, 2, 0.8, 200 + s), 0.3, {"x1", "x2"}, s);
    const FittedModel m = fit_model(ds, ModelKind::gauss_cop);
    fitted.push_back(std::get<GaussCopFit>(*m.shared()).corr(0, 1));
  }
  CHECK(std::abs(testing::median(fitted) - 0.8) < 0.08);
}

TEST_CASE("correlation repair") {
  const Eigen::MatrixXd pd = equicorr(3, 0.3);
  CHECK(repair_correlation(pd) == pd);
  Eigen::MatrixXd bad(3, 3);
  bad << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;
  const Eigen::MatrixXd r = repair_correlation(bad);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
  CHECK(es.eigenvalues().minCoeff() > 0);
  for (int j = 0; j < 3; ++j) CHECK(r(j, j) == doctest::Approx(1.0));
  CHECK((r - r.transpose()).norm() == 0.0);
}

TEST_CASE("GaussCop with identity correlation matches IndepCop in distribution") {
  const Dataset ds = copula_data(1000, 2, 0.0, 8);
  const auto margins = fit_margins(ds);
  const FittedModel ind = fit_indep_cop(ds, margins);
  const FittedModel gc(ModelKind::gauss_cop, ds.schema(), {}, GaussCopFit{margins, Eigen::MatrixXd::Identity(2, 2)},
                       std::nullopt);
  const Dataset a = sample_model(ind, 5000, 1);
  const Dataset b = sample_model(gc, 5000, 2);
  const double crit = 1.63 * std::sqrt(2.0 / 5000); // alpha = 0.01
  for (Eigen::Index c = 0; c < 2; ++c)
    CHECK(testing::ks_statistic(testing::col(a.continuous(), c), testing::col(b.continuous(), c)) < crit);
  std::vector<double> pa, pb;
  for (Eigen::Index i = 0; i < 5000; ++i) {
    pa.push_back(a.continuous()(i, 0) * a.continuous()(i, 1));
    pb.push_back(b.continuous()(i, 0) * b.continuous()(i, 1));
  }
  CHECK(testing::ks_statistic(pa, pb) < crit);
}

TEST_CASE("samples from models fitted on normal data match the training data") {
  const Dataset ds = Dataset::from_continuous(testing::std_normal(3000, 2, 9));
  for (ModelKind k : {ModelKind::gauss_dist, ModelKind::indep_cop, ModelKind::gauss_cop}) {
    const Dataset sim = sample_model(fit_model(ds, k), 10000, 3);
    for (Eigen::Index c = 0; c < 2; ++c)
      CHECK(testing::ks_statistic(testing::col(sim.continuous(), c), testing::col(ds.continuous(), c)) < 0.03);
  }
}

TEST_CASE("sampling is deterministic and thread-count independent") {
  const Dataset ds = copula_data(300, 3, 0.5, 10);
  const FittedModel m = fit_model(ds, ModelKind::gauss_cop);
  const std::string a = to_csv(sample_model(m, 500, 77));
  CHECK(a == to_csv(sample_model(m, 500, 77)));
  CHECK(a != to_csv(sample_model(m, 500, 78)));
  // draw i depends only on (seed, i)
  const Dataset longer = sample_model(m, 800, 77);
  std::vector<std::size_t> first(500);
  for (std::size_t i = 0; i < 500; ++i) first[i] = i;
  CHECK(to_csv(longer.take_rows(first)) == a);
}

TEST_CASE("mixed data: discrete pmf respected and labels never invented") {
  const Schema s({{"v", ColumnKind::continuous}, {"g", ColumnKind::discrete}, {"h", ColumnKind::discrete}});
  std::mt19937_64 eng(11);
  std::normal_distribution<double> z;
  std::string text = "v,g,h\n";
  const char* gs[] = {"a", "b", "c"};
  const char* hs[] = {"yes", "no"};
  for (int i = 0; i < 600; ++i) {
    const int g = i % 6 < 3 ? 0 : (i % 6 < 5 ? 1 : 2);
    const int h = i % 4 == 0;
    text += std::to_string(z(eng) + 3.0 * g) + "," + gs[g] + "," + hs[h] + "\n";
  }
  const Dataset ds = parse_csv(text, s);
  const FittedModel m = fit_model(ds, ModelKind::gauss_cop);
  REQUIRE(m.discrete());
  double total = 0;
  for (double p : m.discrete()->pmf) total += p;
  CHECK(total == doctest::Approx(1.0));
  CHECK(m.discrete()->per_stratum.size() == m.discrete()->keys.size());

  const Dataset sim = sample_model(m, 100000, 5);
  CHECK(sim.labels() == ds.labels());
  std::map<std::vector<int>, double> freq;
  for (Eigen::Index i = 0; i < sim.discrete().rows(); ++i)
    freq[{sim.discrete()(i, 0), sim.discrete()(i, 1)}] += 1.0 / 100000;
  CHECK(freq.size() == m.discrete()->keys.size());
  for (std::size_t k = 0; k < m.discrete()->keys.size(); ++k)
    CHECK(std::abs(freq[m.discrete()->keys[k]] - m.discrete()->pmf[k]) < 0.01);

  CHECK_THROWS_AS(fit_model(ds, ModelKind::gauss_dist), FitError);
}

TEST_CASE("small strata share one continuous fit") {
  const Schema s({{"v", ColumnKind::continuous}, {"g", ColumnKind::discrete}});
  std::string text = "v,g\n";
  for (int i = 0; i < 60; ++i) text += std::to_string(i * 0.37) + "," + (i < 50 ? "big" : "small") + "\n";
  const FittedModel m = fit_model(parse_csv(text, s), ModelKind::indep_cop);
  CHECK(m.shared());
  CHECK(m.discrete()->per_stratum.empty());
}

TEST_CASE("marginalised sample of a product model matches a direct fit") {
  const Dataset ds = copula_data(2000, 3, 0.0, 12);
  const Dataset full = marginalize_columns(sample_model(fit_model(ds, ModelKind::indep_cop), 5000, 1), {"x2"});
  const Dataset direct = sample_model(fit_model(marginalize_columns(ds, {"x2"}), ModelKind::indep_cop), 5000, 2);
  CHECK(testing::ks_statistic(testing::col(full.continuous(), 0), testing::col(direct.continuous(), 0)) < 0.03);
}

TEST_CASE("model kind names") {
  CHECK(model_kind_from_string("gausscop") == ModelKind::gauss_cop);
  CHECK(model_kind_from_string("GaussDist") == ModelKind::gauss_dist);
  CHECK(to_string(ModelKind::indep_cop) == "IndepCop");
  CHECK_THROWS_AS(model_kind_from_string("vine"), ConfigError);
}
