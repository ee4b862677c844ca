#include <benchmark/benchmark.h>

#include <random>

#include "roomrec/nn/arch.hpp"
#include "roomrec/nn/network.hpp"

using namespace roomrec;

namespace {

const char *kArchs[] = {"CNN-C", "DNN-spec", "CNN-psd"};

std::vector<float> inputs(const nn::Network<float> &net, std::size_t n) {
    std::mt19937_64 rng(3);
    std::normal_distribution<float> g;
    std::vector<float> x(n * net.input_size());
    for (auto &v : x) v = g(rng);
    return x;
}

// one recognition request: a single record through the float model
void BM_Inference(benchmark::State &state) {
    nn::Network<float> net(nn::build_named_arch(kArchs[state.range(0)], 22));
    net.init(1);
    const auto x = inputs(net, 1);
    for (auto _ : state) benchmark::DoNotOptimize(net.logits(x, 1));
    state.SetLabel(kArchs[state.range(0)]);
}
BENCHMARK(BM_Inference)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

// forward + backward over a 100-record minibatch
void BM_TrainStep(benchmark::State &state) {
    nn::Network<float> net(nn::build_named_arch(kArchs[state.range(0)], 10));
    net.init(1);
    const auto x = inputs(net, 100);
    std::vector<int> y(100);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 10);
    auto grads = net.zero_gradients();
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(net.loss_and_gradients(x, y, seed++, &grads));
    state.SetLabel(kArchs[state.range(0)]);
}
BENCHMARK(BM_TrainStep)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
