#include "covkl/error.hpp"
#include "covkl/kld.hpp"
#include "covkl/nn.hpp"
#include "covkl/uq.hpp"
#include "test_support.hpp"

#include <doctest.h>
#include <omp.h>

#include <atomic>
#include <cmath>
#include <set>

using namespace covkl;

namespace {

Dataset normal(std::size_t n, std::size_t d, unsigned seed) {
  return Dataset::from_continuous(testing::std_normal(n, d, seed));
}

double first_mean(const Dataset& x, const Dataset&) { return x.continuous().col(0).mean(); }

SubsamplingConfig config(std::size_t s, std::uint64_t seed) {
  SubsamplingConfig cfg;
  cfg.replicates = s;
  cfg.seed = seed;
  return cfg;
}

} // namespace

TEST_CASE("config validation") {
  SubsamplingConfig c;
  CHECK_NOTHROW(c.validate());
  c.b_exponent = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.replicates = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.alpha = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("constant estimator gives a degenerate interval") {
  const KlEstimate e = subsample_ci(normal(100, 1, 1), normal(100, 1, 2),
                                    [](const Dataset&, const Dataset&) { return 0.7; }, config(50, 1));
  REQUIRE(e.ci);
  CHECK(e.ci->lower == 0.7);
  CHECK(e.ci->upper == 0.7);
  CHECK(e.level == doctest::Approx(0.95));
}

TEST_CASE("interval is ordered and deterministic") {
  const Dataset x = normal(300, 2, 3);
  const Dataset y = normal(300, 2, 4);
  const KlEstimate a = subsample_ci(x, y, mixed_kl_estimator(), config(200, 9));
  const KlEstimate b = subsample_ci(x, y, mixed_kl_estimator(), config(200, 9));
  REQUIRE(a.ci);
  CHECK(a.ci->lower <= a.ci->upper);
  CHECK(a.ci->lower == b.ci->lower);
  CHECK(a.ci->upper == b.ci->upper);
  CHECK(a.value == kld_est_bc(x.continuous(), y.continuous()).value);
  const KlEstimate c = subsample_ci(x, y, mixed_kl_estimator(), config(200, 10));
  CHECK(c.ci->lower != a.ci->lower);
}

TEST_CASE("thread count does not change the result") {
  const Dataset x = normal(300, 2, 5);
  const Dataset y = normal(400, 2, 6);
  const int before = omp_get_max_threads();
  omp_set_num_threads(1);
  const KlEstimate serial = subsample_ci(x, y, mixed_kl_estimator(), config(100, 3));
  omp_set_num_threads(4);
  const KlEstimate parallel = subsample_ci(x, y, mixed_kl_estimator(), config(100, 3));
  omp_set_num_threads(before);
  CHECK(serial.ci->lower == parallel.ci->lower);
  CHECK(serial.ci->upper == parallel.ci->upper);
}

TEST_CASE("subsamples are drawn without replacement at the configured sizes") {
  const Dataset x = normal(125, 1, 7);
  const Dataset y = normal(1000, 1, 8);
  std::atomic<int> bad{0};
  std::atomic<int> calls{0};
  const PointMatrix xs = x.continuous();
  auto check = [&](const Dataset& a, const Dataset& b) {
    ++calls;
    if (a.n_rows() == x.n_rows()) return 0.0; // the full-sample estimate
    if (a.n_rows() != 25 || b.n_rows() != 100) ++bad;
    if (has_duplicate_points(a.continuous()) || has_duplicate_points(b.continuous())) ++bad;
    return 0.0;
  };
  subsample_ci(x, y, check, config(40, 1));
  CHECK(calls == 41);
  CHECK(bad == 0);
}

TEST_CASE("failed replicates are counted and the threshold enforced") {
  const Dataset x = normal(200, 1, 9);
  const Dataset y = normal(200, 1, 10);
  // fails when the subsample's first value is positive: about half the replicates
  auto flaky = [&](const Dataset& a, const Dataset&) {
    if (a.n_rows() < x.n_rows() && a.continuous()(0, 0) > 0.0) throw EstimationError("flaky");
    return 1.0;
  };
  CHECK_THROWS_AS(subsample_ci(x, y, flaky, config(100, 2)), SubsamplingError);
  SubsamplingConfig lenient = config(100, 2);
  lenient.max_failure_fraction = 0.9;
  const KlEstimate e = subsample_ci(x, y, flaky, lenient);
  CHECK(e.failures > 20);
  CHECK(e.failures < 80);

  const auto dist = subsample_distribution(x, y, flaky, 1.0, 10, 10, 100, 0.5, 2);
  CHECK(dist.failures + dist.values.size() == 100);
}

TEST_CASE("convergence rate of the sample mean is one half") {
  const Dataset x = normal(4000, 1, 11);
  const Dataset y = normal(10, 1, 12);
  const double beta = estimate_convergence_rate(x, y, first_mean, {50, 100, 200, 400}, 500, 3);
  CHECK(beta >= 0.4);
  CHECK(beta <= 0.6);
}

TEST_CASE("convergence rate rejects degenerate input") {
  const Dataset x = normal(500, 1, 1);
  auto constant = [](const Dataset&, const Dataset&) { return 2.0; };
  CHECK_THROWS_AS(estimate_convergence_rate(x, x, constant, {50, 100, 200}, 50, 1), EstimationError);
  CHECK_THROWS_AS(estimate_convergence_rate(x, x, first_mean, {50, 100}, 50, 1), ConfigError);
  CHECK_THROWS_AS(estimate_convergence_rate(x, x, first_mean, {50, 100, 1000}, 50, 1), ConfigError);
}

TEST_CASE("subsampling CI for the mean covers the truth") {
  int covered = 0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    const Dataset x = normal(400, 1, 1000 + r);
    const KlEstimate e = subsample_ci(x, x, first_mean, config(300, r));
    covered += e.ci->contains(0.0);
  }
  CHECK(covered >= 88);
}

TEST_CASE("CI width shrinks like n^-1/2") {
  std::vector<double> small, large;
  for (unsigned r = 0; r < 20; ++r) {
    auto width = [&](std::size_t n) {
      const Dataset x = Dataset::from_continuous(testing::gaussian(n, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), 300 + r));
      const Dataset y = Dataset::from_continuous(testing::gaussian(n, Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Identity(1, 1), 600 + r));
      return subsample_ci(x, y, mixed_kl_estimator(), config(400, r)).ci->width();
    };
    small.push_back(width(500));
    large.push_back(width(1000));
  }
  const double ratio = testing::median(large) / testing::median(small);
  CHECK(ratio >= 0.6);
  CHECK(ratio <= 0.8);
}
