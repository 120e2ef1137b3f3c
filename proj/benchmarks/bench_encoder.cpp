#include "pcc/encoder.hpp"
#include "pcc/rng.hpp"

#include <benchmark/benchmark.h>

namespace {

Eigen::MatrixXd random_features(Eigen::Index rows, Eigen::Index cols) {
    pcc::Rng rng(7);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

void BM_Encode(benchmark::State& state) {
    const pcc::EncoderShape shape;
    const auto params = pcc::init_encoder(shape, 1);
    const auto x = random_features(state.range(0), shape.input_dim);
    for (auto _ : state) benchmark::DoNotOptimize(pcc::encode(params, x));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Encode)->RangeMultiplier(4)->Range(64, 4096);

void BM_EncodeBackward(benchmark::State& state) {
    const pcc::EncoderShape shape;
    const auto params = pcc::init_encoder(shape, 1);
    const auto x = random_features(state.range(0), shape.input_dim);
    pcc::EncodeCache cache;
    const Eigen::MatrixXd out = pcc::encode(params, x, &cache);
    const Eigen::MatrixXd upstream = Eigen::MatrixXd::Ones(out.rows(), out.cols());
    for (auto _ : state) benchmark::DoNotOptimize(pcc::encode_backward(params, cache, upstream));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncodeBackward)->RangeMultiplier(4)->Range(64, 4096);

} // namespace
