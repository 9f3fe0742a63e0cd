#include <benchmark/benchmark.h>

#include "raresens/ldp.hpp"

using namespace raresens;

namespace {

void BM_markov_rate(benchmark::State& state) {
  const MarkovModel m = birth_death({0.2, 0.5, 0.7});
  for (auto _ : state) benchmark::DoNotOptimize(markov_rate(m, 0.9));
}
BENCHMARK(BM_markov_rate);

void BM_markov_sensitivity(benchmark::State& state) {
  const MarkovModel m = birth_death({0.2, 0.5, 0.7});
  const Vec v = {1.0, 0.0, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(markov_sensitivity(m, v, 0.9));
}
BENCHMARK(BM_markov_sensitivity);

void BM_dp_sum_distribution(benchmark::State& state) {
  const MarkovModel m = birth_death({0.2, 0.5, 0.7});
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dp_sum_distribution(m, n));
}
BENCHMARK(BM_dp_sum_distribution)->Arg(100)->Arg(300)->Arg(1000);

void BM_fd_sensitivity(benchmark::State& state) {
  const MarkovModel m = birth_death({0.2, 0.5, 0.7});
  const Vec v = {0.0, 1.0, 0.0};
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fd_sensitivity(m, v, n, 0.9));
}
BENCHMARK(BM_fd_sensitivity)->Arg(100)->Arg(300);

}  // namespace

BENCHMARK_MAIN();
