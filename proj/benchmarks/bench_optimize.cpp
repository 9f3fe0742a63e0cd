#include <benchmark/benchmark.h>

#include <cmath>

#include "raresens/cgf.hpp"
#include "raresens/distributions.hpp"
#include "raresens/optimize.hpp"
#include "raresens/sensitivity.hpp"
#include "raresens/uq.hpp"

using namespace raresens;

namespace {

DiscreteDist geometric_like(std::size_t n) {
  Vec p(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += p[i] = std::pow(0.7, static_cast<double>(i));
  for (double& x : p) x /= total;
  return DiscreteDist(p);
}

Vec ramp_scores(const DiscreteDist& d) {
  const std::size_t n = d.size();
  Vec g(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += d.prob(i) * (g[i] = static_cast<double>(i));
  for (double& x : g) x -= mean;
  return g;
}

void BM_minimize_bound(benchmark::State& state) {
  const DiscreteDist d = geometric_like(static_cast<std::size_t>(state.range(0)));
  const Cgf h = Cgf::from_discrete(d, ramp_scores(d));
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize_bound(h, 2.0, Sign::Plus));
    benchmark::DoNotOptimize(minimize_bound(h, 2.0, Sign::Minus));
  }
}
BENCHMARK(BM_minimize_bound)->Arg(8)->Arg(64)->Arg(512);

void BM_sensitivity_gaussian(benchmark::State& state) {
  const ExpFamModel model = ExpFamModel::gaussian_mean(0.0, 1.0);
  const double m = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sensitivity_indices(model, {1.0}, m));
}
BENCHMARK(BM_sensitivity_gaussian)->Arg(1)->Arg(10)->Arg(30);

void BM_optimal_bounds(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const DiscreteDist p = geometric_like(n);
  Vec w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += w[i] = std::pow(0.8, static_cast<double>(i));
  for (double& x : w) x /= total;
  const DiscreteDist q(w);
  for (auto _ : state) benchmark::DoNotOptimize(optimal_bounds(p, q, 3.0));
}
BENCHMARK(BM_optimal_bounds)->Arg(8)->Arg(64)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
