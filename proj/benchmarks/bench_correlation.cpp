#include "pcc/correlation.hpp"
#include "pcc/rng.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed, bool ties) {
    pcc::Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = ties ? static_cast<double>(rng.below(6)) : rng.normal();
    return v;
}

void BM_Ranks(benchmark::State& state) {
    const auto v = random_values(static_cast<std::size_t>(state.range(0)), 1, state.range(1) != 0);
    for (auto _ : state) benchmark::DoNotOptimize(pcc::compute_ranks(v));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Ranks)->ArgsProduct({{1 << 8, 1 << 12, 1 << 16}, {0, 1}})->Complexity();

void BM_Spearman(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = random_values(n, 2, false);
    const auto y = random_values(n, 3, false);
    for (auto _ : state) benchmark::DoNotOptimize(pcc::spearman(x, y));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Spearman)->RangeMultiplier(8)->Range(1 << 8, 1 << 17)->Complexity();

} // namespace
