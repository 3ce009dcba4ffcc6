#include <benchmark/benchmark.h>

#include "braidopt/anneal.hpp"
#include "braidopt/cost.hpp"
#include "braidopt/model.hpp"
#include "braidopt/propagator.hpp"

using namespace braidopt;

static void BM_GeneratorAssembly(benchmark::State& state) {
  const ControlVector c{0.3, 0.7, 0.4};
  for (auto _ : state) {
    Superoperator s = generator(c, 0.0625);
    benchmark::DoNotOptimize(s.K);
  }
}
BENCHMARK(BM_GeneratorAssembly);

static void BM_SegmentExponential(benchmark::State& state) {
  const ControlVector c{0.3, 0.7, 0.4};
  const double w2 = state.range(0) == 0 ? 0.0 : 0.0625;
  for (auto _ : state) {
    Matrix16cd e = segment_exponential(c, w2, 0.02);
    benchmark::DoNotOptimize(e);
  }
}
BENCHMARK(BM_SegmentExponential)->Arg(0)->Arg(1);

static void BM_CandidateCost(benchmark::State& state) {
  const double tau = 0.02 * state.range(0);
  const Protocol p = random_protocol(tau, 0.02, 12);
  const StatePair st = canonical_states();
  const double w = state.range(1) == 0 ? 0.0 : 0.25;
  SweepCostCache cache(p, NoiseStrength(w), st.rho0, st.sigma);
  const ControlVector cand{0.5, 0.5, 0.5};
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cache.candidate_cost(k % p.size(), cand));
    ++k;
  }
}
BENCHMARK(BM_CandidateCost)
    ->Args({100, 0})
    ->Args({100, 1})
    ->Args({400, 0})
    ->Args({400, 1});

static void BM_FullPropagation(benchmark::State& state) {
  const double tau = 0.02 * state.range(0);
  const Protocol p = random_protocol(tau, 0.02, 12);
  const StatePair st = canonical_states();
  const NoiseStrength w(state.range(1) == 0 ? 0.0 : 0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        trace_distance(st.sigma, propagate(p, w, st.rho0)));
  }
}
BENCHMARK(BM_FullPropagation)
    ->Args({100, 0})
    ->Args({100, 1})
    ->Args({400, 0})
    ->Args({400, 1});

static void BM_TraceDistance(benchmark::State& state) {
  const StatePair st = canonical_states();
  for (auto _ : state)
    benchmark::DoNotOptimize(trace_distance(st.sigma, st.rho0));
}
BENCHMARK(BM_TraceDistance);

BENCHMARK_MAIN();
