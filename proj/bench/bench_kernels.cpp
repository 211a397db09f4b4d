#include <benchmark/benchmark.h>

#include <optional>
#include <random>
#include <vector>

#include "walshpp/kernels.hpp"
#include "walshpp/phaseplane.hpp"
#include "walshpp/signal.hpp"
#include "walshpp/varnorm.hpp"

using namespace walshpp;

namespace {

std::vector<double> random_vector(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

DiscreteSignal random_signal(const GridSpec& g) { return {g, random_vector(g.size())}; }

void BM_WhtSerial(benchmark::State& st) {
  const auto v0 = random_vector(std::size_t{1} << st.range(0));
  for (auto _ : st) {
    auto v = v0;
    kernels::wht_serial(v);
    benchmark::DoNotOptimize(v.data());
  }
}

void BM_WhtParallel(benchmark::State& st) {
  const auto v0 = random_vector(std::size_t{1} << st.range(0));
  for (auto _ : st) {
    auto v = v0;
    kernels::wht_parallel(v);
    benchmark::DoNotOptimize(v.data());
  }
}

void BM_BlockWhtSerial(benchmark::State& st) {
  const auto v0 = random_vector(std::size_t{1} << 20);
  for (auto _ : st) {
    auto v = v0;
    kernels::block_wht_serial(v, std::size_t{1} << st.range(0));
    benchmark::DoNotOptimize(v.data());
  }
}

void BM_BlockWhtParallel(benchmark::State& st) {
  const auto v0 = random_vector(std::size_t{1} << 20);
  for (auto _ : st) {
    auto v = v0;
    kernels::block_wht_parallel(v, std::size_t{1} << st.range(0));
    benchmark::DoNotOptimize(v.data());
  }
}

void BM_PartialSumField(benchmark::State& st) {
  const GridSpec g(static_cast<int>(st.range(0)) / 2, static_cast<int>(st.range(0) - st.range(0) / 2));
  const DiscreteSignal f = random_signal(g);
  const BitileSet all = BitileSet::all(g);
  for (auto _ : st) benchmark::DoNotOptimize(partial_sum_field(f, all).values.data());
}

void BM_WeightedFieldReference(benchmark::State& st) {
  const GridSpec g(static_cast<int>(st.range(0)) / 2, static_cast<int>(st.range(0) - st.range(0) / 2));
  const DiscreteSignal f = random_signal(g);
  const BitileSet all = BitileSet::all(g);
  const WeightFn one = [](const Bitile&, int) { return std::optional<double>(1.0); };
  for (auto _ : st) benchmark::DoNotOptimize(weighted_field_reference(f, all, {}, one).values.data());
}

void BM_VariationNorm(benchmark::State& st) {
  const auto v = random_vector(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(variation_norm(v, 3.0));
}

}  // namespace

BENCHMARK(BM_WhtSerial)->DenseRange(10, 20, 5);
BENCHMARK(BM_WhtParallel)->DenseRange(10, 20, 5);
BENCHMARK(BM_BlockWhtSerial)->Arg(4)->Arg(8)->Arg(12);
BENCHMARK(BM_BlockWhtParallel)->Arg(4)->Arg(8)->Arg(12);
BENCHMARK(BM_PartialSumField)->Arg(6)->Arg(8)->Arg(10);
BENCHMARK(BM_WeightedFieldReference)->Arg(6)->Arg(8);
BENCHMARK(BM_VariationNorm)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
