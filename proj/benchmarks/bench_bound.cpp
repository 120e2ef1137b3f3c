#include "pcc/bound.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_SumDSqClosed(benchmark::State& state) {
    const auto n = state.range(0);
    for (auto _ : state) benchmark::DoNotOptimize(pcc::bound::sum_d_sq_closed(n, n / 2));
}
BENCHMARK(BM_SumDSqClosed)->RangeMultiplier(100)->Range(100, 1'000'000);

void BM_SumDSqBruteForce(benchmark::State& state) {
    const auto n = state.range(0);
    for (auto _ : state) benchmark::DoNotOptimize(pcc::bound::sum_d_sq_bruteforce(n, n / 2));
    state.SetComplexityN(n);
}
BENCHMARK(BM_SumDSqBruteForce)->RangeMultiplier(10)->Range(100, 1'000'000)->Complexity();

void BM_MaxSpearmanExact(benchmark::State& state) {
    const auto n = state.range(0);
    for (auto _ : state) benchmark::DoNotOptimize(pcc::bound::max_spearman_exact(n));
}
BENCHMARK(BM_MaxSpearmanExact)->Arg(101)->Arg(1'000'000);

} // namespace
