// Microbenchmarks for the hot paths of the sweep, plus one end-to-end run.
#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "sapenum/modular.hpp"
#include "sapenum/pruning.hpp"
#include "sapenum/signature.hpp"
#include "sapenum/tm_engine.hpp"

using namespace sapenum;

namespace {

// All balanced signatures with the given edge count, as packed keys.
std::vector<std::uint64_t> balanced_keys(int edges) {
  std::vector<std::uint64_t> keys;
  std::uint64_t limit = 1;
  for (int i = 0; i < edges; ++i) limit *= 3;
  for (std::uint64_t code = 0; code < limit; ++code) {
    Signature sig;
    std::uint64_t rest = code;
    for (int i = 0; i < edges; ++i) {
      sig.edges.push_back(static_cast<EdgeState>(rest % 3));
      rest /= 3;
    }
    if (is_balanced(sig)) keys.push_back(pack(sig));
  }
  return keys;
}

// Mid-sweep boundary state: width 10 advanced to the start of column 6.
BoundaryStateMap mid_sweep_state(const SweepConfig& cfg) {
  BoundaryStateMap state = initial_state(cfg);
  RectangleResult harvest;
  for (int c = 1; c <= 5; ++c) {
    for (int r = 1; r <= cfg.width; ++r)
      state = update_site(state, r, c, cfg, harvest);
    state = advance_column(std::move(state), cfg);
  }
  return state;
}

void BM_ModMul(benchmark::State& bench) {
  Modulus mod = default_moduli()[static_cast<std::size_t>(bench.range(0))];
  std::uint64_t a = 0x123456789abcdefULL % mod.m;
  std::uint64_t b = 0xfedcba987654321ULL % mod.m;
  for (auto _ : bench) {
    a = mod_mul(a, b, mod);
    benchmark::DoNotOptimize(a);
  }
}
BENCHMARK(BM_ModMul)->Arg(0)->Arg(1)->Arg(2);

void BM_MatchPairs(benchmark::State& bench) {
  std::vector<std::uint64_t> keys = balanced_keys(9);
  for (auto _ : bench)
    for (std::uint64_t key : keys) {
      LoopPairing pairs = match_pairs(unpack(key, 8));
      benchmark::DoNotOptimize(pairs);
    }
  bench.SetItemsProcessed(static_cast<std::int64_t>(bench.iterations()) *
                          static_cast<std::int64_t>(keys.size()));
}
BENCHMARK(BM_MatchPairs);

void BM_CompletionBound(benchmark::State& bench) {
  std::vector<std::uint64_t> keys = balanced_keys(9);
  for (auto _ : bench)
    for (std::uint64_t key : keys) {
      PruneBound bound = completion_bound(key, 9, 4, 5, 8);
      benchmark::DoNotOptimize(bound);
    }
  bench.SetItemsProcessed(static_cast<std::int64_t>(bench.iterations()) *
                          static_cast<std::int64_t>(keys.size()));
}
BENCHMARK(BM_CompletionBound);

void BM_UpdateSite(benchmark::State& bench) {
  SweepConfig cfg = SweepConfig::for_width(10, 10, default_moduli());
  BoundaryStateMap state = mid_sweep_state(cfg);
  for (auto _ : bench) {
    RectangleResult harvest;
    BoundaryStateMap next = update_site(state, 1, 6, cfg, harvest);
    benchmark::DoNotOptimize(next);
  }
  bench.SetItemsProcessed(static_cast<std::int64_t>(bench.iterations()) *
                          static_cast<std::int64_t>(state.size()));
}
BENCHMARK(BM_UpdateSite);

void BM_Enumerate(benchmark::State& bench) {
  int w_max = static_cast<int>(bench.range(0));
  for (auto _ : bench) {
    EnumerateResult result = enumerate_polygons(w_max, default_moduli(), 1);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_Enumerate)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
