#include "pcc/losses.hpp"
#include "pcc/rng.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, pcc::Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

void BM_PearsonLossGrad(benchmark::State& state) {
    pcc::Rng rng(5);
    pcc::SimilarityBatch batch;
    for (std::int64_t i = 0; i < state.range(0); ++i) {
        batch.cosines.push_back(rng.uniform(-1.0, 1.0));
        batch.gold_scores.push_back(rng.uniform(0.0, 5.0));
    }
    std::vector<double> grad;
    for (auto _ : state) {
        benchmark::DoNotOptimize(pcc::pearson_loss_and_grad(batch, pcc::VarianceGuard::Training, &grad));
    }
}
BENCHMARK(BM_PearsonLossGrad)->RangeMultiplier(4)->Range(64, 4096);

void BM_ContrastiveLossGrad(benchmark::State& state) {
    pcc::Rng rng(6);
    const auto n = state.range(0);
    const bool extended = state.range(1) != 0;
    pcc::ContrastiveBatch batch{random_matrix(n, 32, rng), random_matrix(n, 32, rng), std::nullopt, 0.05};
    if (extended) batch.hard_negatives = random_matrix(n, 32, rng);
    pcc::ContrastiveGrad grad;
    for (auto _ : state) benchmark::DoNotOptimize(pcc::contrastive_loss_and_grad(batch, extended, &grad));
}
BENCHMARK(BM_ContrastiveLossGrad)->ArgsProduct({{16, 64, 256}, {0, 1}});

} // namespace
