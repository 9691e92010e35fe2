// Tree/OpenMP estimator vs the brute-force serial reference.

#include "covkl/harness.hpp"
#include "covkl/kld.hpp"
#include "covkl/reference.hpp"

#include <benchmark/benchmark.h>

namespace {

struct Pair {
  covkl::PointMatrix x;
  covkl::PointMatrix y;
};

Pair make_pair(std::size_t n, int d) {
  const Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd shifted = mu;
  shifted(0) = 1.0;
  return {covkl::harness::sample_gaussian(mu, cov, n, 11).continuous(),
          covkl::harness::sample_gaussian(shifted, cov, n, 12).continuous()};
}

void BM_bc_tree(benchmark::State& state) {
  const Pair p = make_pair(static_cast<std::size_t>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(covkl::kld_est_bc(p.x, p.y).value);
  state.SetComplexityN(state.range(0));
}

void BM_bc_reference(benchmark::State& state) {
  const Pair p = make_pair(static_cast<std::size_t>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(covkl::reference::kld_est_bc(p.x, p.y).value);
  state.SetComplexityN(state.range(0));
}

void BM_nn_tree(benchmark::State& state) {
  const Pair p = make_pair(static_cast<std::size_t>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(covkl::kld_est_nn(p.x, p.y).value);
}

void BM_nn_reference(benchmark::State& state) {
  const Pair p = make_pair(static_cast<std::size_t>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(covkl::reference::kld_est_nn(p.x, p.y).value);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int d : {1, 3, 10})
    for (int n : {500, 2000, 5000}) b->Args({n, d});
  b->Unit(benchmark::kMillisecond);
}

} // namespace

BENCHMARK(BM_bc_tree)->Apply(sizes);
BENCHMARK(BM_bc_reference)->Apply(sizes);
BENCHMARK(BM_nn_tree)->Apply(sizes);
BENCHMARK(BM_nn_reference)->Apply(sizes);

BENCHMARK_MAIN();
