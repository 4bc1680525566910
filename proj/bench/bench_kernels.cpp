// Serial reference kernels against their OpenMP counterparts.
// Run with REFGEO_THREADS=N to pin the worker count.

#include <benchmark/benchmark.h>

#include <vector>

#include "refgeo/kernels.hpp"
#include "refgeo/rng.hpp"

using namespace refgeo;

namespace {

std::vector<double> random_values(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(count);
  for (auto& x : v) x = rng.normal();
  return v;
}

struct Data {
  std::vector<double> a, b;
  kernels::MatrixView va, vb;
  Data(std::size_t n, std::size_t d)
      : a(random_values(n * d, 1)), b(random_values(n * d, 2)), va{a.data(), n, d}, vb{b.data(), n, d} {}
};

template <auto Fn>
void knn(benchmark::State& state) {
  const Data data(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(data.va, 80));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <auto Fn>
void poly(benchmark::State& state) {
  const Data data(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(data.va, data.vb));
  state.SetItemsProcessed(state.iterations() * 3 * state.range(0) * state.range(0));
}

template <auto Fn>
void gram(benchmark::State& state) {
  const Data data(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(data.va));
}

template <auto Fn>
void coverage(benchmark::State& state) {
  const Data data(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const auto radii = kernels::serial::kth_neighbor_sq_distances(data.vb, 3);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(data.va, data.vb, radii));
}

void configure(const benchmark::State&) { kernels::configure_threads_from_env(); }

}  // namespace

#define REFGEO_PAIR(name, fn, ...)                                                            \
  BENCHMARK_TEMPLATE(name, kernels::serial::fn)->Name("serial/" #fn)->Setup(configure)__VA_ARGS__; \
  BENCHMARK_TEMPLATE(name, kernels::omp::fn)->Name("omp/" #fn)->Setup(configure)__VA_ARGS__

REFGEO_PAIR(knn, kth_neighbor_sq_distances, ->Args({2000, 16})->Args({2000, 2048})->Unit(benchmark::kMillisecond));
REFGEO_PAIR(poly, polynomial_kernel_sums, ->Args({1000, 2048})->Unit(benchmark::kMillisecond));
REFGEO_PAIR(gram, gram, ->Args({5000, 256})->Unit(benchmark::kMillisecond));
REFGEO_PAIR(coverage, count_covered, ->Args({2000, 64})->Unit(benchmark::kMillisecond));

BENCHMARK_MAIN();
