// Serial reference versus block-parallel reductions, and the end-to-end
// routines built on them.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "wentropy/fisher.hpp"
#include "wentropy/functionals.hpp"
#include "wentropy/kernels.hpp"
#include "wentropy/suite.hpp"

using namespace wentropy;

namespace {

// -phi f log f nu on a grid of n points, the integrand of the weighted entropy.
struct EntropyTerms {
  std::vector<double> f, phi, nu;
  explicit EntropyTerms(std::size_t n) : f(n), phi(n), nu(n, 1.0 / static_cast<double>(n)) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = -8.0 + 16.0 * static_cast<double>(i) / static_cast<double>(n - 1);
      f[i] = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
      phi[i] = 1.0 + 0.5 * std::tanh(x);
    }
  }
  double operator()(std::size_t i) const {
    return f[i] > 0.0 ? -phi[i] * f[i] * std::log(f[i]) * nu[i] : 0.0;
  }
};

void BM_ReduceSerial(benchmark::State& state) {
  const EntropyTerms t(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::reduce_sum(t.f.size(), t));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ReduceParallel(benchmark::State& state) {
  const EntropyTerms t(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::reduce_sum(t.f.size(), t));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

// Outer-product accumulation with k = 4 entries per point, as in a 2 x 2
// Fisher matrix.
template <bool Parallel>
void BM_ReduceVec(benchmark::State& state) {
  const EntropyTerms t(static_cast<std::size_t>(state.range(0)));
  auto term = [&](std::size_t i, double* out) {
    const double s0 = t.phi[i], s1 = t.f[i];
    const double w = t.f[i] * t.nu[i];
    out[0] += w * s0 * s0;
    out[1] += w * s0 * s1;
    out[2] += w * s1 * s0;
    out[3] += w * s1 * s1;
  };
  for (auto _ : state) {
    if constexpr (Parallel)
      benchmark::DoNotOptimize(kernels::reduce_sum_vec(t.f.size(), 4, term));
    else
      benchmark::DoNotOptimize(kernels::serial::reduce_sum_vec(t.f.size(), 4, term));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_WeightedEntropyGaussian2D(benchmark::State& state) {
  const Matrix cov(2, 2, {1.0, 0.5, 0.5, 1.0});
  const ProductSpace grid = make_gaussian_grid(cov);
  const Density f = gaussian_density(grid, cov);
  const WeightFunction phi = tabulate_weight(grid, step_weight(0.0));
  for (auto _ : state) benchmark::DoNotOptimize(weighted_entropy(f, phi));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}

void BM_WeightedFisherGaussian2D(benchmark::State& state) {
  const Matrix cov(2, 2, {1.0, 0.3, 0.3, 2.0});
  const ParametricFamily fam = gaussian_location_d_family(cov);
  const WeightFunction phi = WeightFunction::constant(fam.support);
  const std::vector<double> theta{0.2, -0.1};
  for (auto _ : state) benchmark::DoNotOptimize(weighted_fisher(fam, phi, theta));
}

void BM_SuiteSweep(benchmark::State& state) {
  SuiteOptions o;
  o.instances = 1000;
  o.theorems = {"strong_subadditivity"};
  for (auto _ : state) benchmark::DoNotOptimize(run_suite(o));
  state.SetItemsProcessed(state.iterations() * 1000);
}

}  // namespace

BENCHMARK(BM_ReduceSerial)->RangeMultiplier(16)->Range(1 << 12, 1 << 20);
BENCHMARK(BM_ReduceParallel)->RangeMultiplier(16)->Range(1 << 12, 1 << 20);
BENCHMARK(BM_ReduceVec<false>)->RangeMultiplier(16)->Range(1 << 12, 1 << 20);
BENCHMARK(BM_ReduceVec<true>)->RangeMultiplier(16)->Range(1 << 12, 1 << 20);
BENCHMARK(BM_WeightedEntropyGaussian2D)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_WeightedFisherGaussian2D)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SuiteSweep)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
