#include <benchmark/benchmark.h>

#include <random>

#include "roomrec/audio/fft.hpp"
#include "roomrec/audio/framing.hpp"
#include "roomrec/audio/spectral.hpp"
#include "roomrec/baseline/mfcc.hpp"
#include "roomrec/nn/features.hpp"
#include "roomrec/sim/echo_sim.hpp"

using namespace roomrec;

namespace {

audio::AudioRecord sample_record() {
    auto rng = sim::record_rng(1, 0, 0);
    return sim::synth_record(sim::default_profiles(1)[0], sim::CaptureContext{}, rng);
}

void BM_Fft(benchmark::State &state) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<double> x(static_cast<std::size_t>(state.range(0)));
    for (auto &v : x) v = g(rng);
    for (auto _ : state) benchmark::DoNotOptimize(audio::fft(x));
}
BENCHMARK(BM_Fft)->Arg(256)->Arg(1021)->Arg(6480);

void BM_Spectrogram(benchmark::State &state) {
    const audio::EchoFrame frame = audio::echo_frame(sample_record());
    for (auto _ : state) benchmark::DoNotOptimize(audio::spectrogram(frame));
}
BENCHMARK(BM_Spectrogram);

void BM_NarrowbandPsd(benchmark::State &state) {
    const audio::EchoFrame frame = audio::echo_frame(sample_record());
    for (auto _ : state) benchmark::DoNotOptimize(audio::psd_narrowband(frame));
}
BENCHMARK(BM_NarrowbandPsd);

void BM_Mfcc(benchmark::State &state) {
    const audio::EchoFrame frame = audio::echo_frame(sample_record());
    for (auto _ : state) benchmark::DoNotOptimize(baseline::mfcc(frame));
}
BENCHMARK(BM_Mfcc);

void BM_FeaturesFromRecord(benchmark::State &state) {
    const auto rec = sample_record();
    const auto kind = state.range(0) == 0 ? nn::InputKind::spectrogram : nn::InputKind::psd;
    for (auto _ : state) benchmark::DoNotOptimize(nn::extract_features(rec, kind));
}
BENCHMARK(BM_FeaturesFromRecord)->Arg(0)->Arg(1);

void BM_SynthRecord(benchmark::State &state) {
    const auto profile = sim::default_profiles(1)[0];
    std::uint64_t i = 0;
    for (auto _ : state) {
        auto rng = sim::record_rng(1, 0, i++);
        benchmark::DoNotOptimize(sim::synth_record(profile, sim::CaptureContext{}, rng));
    }
}
BENCHMARK(BM_SynthRecord);

}  // namespace

BENCHMARK_MAIN();
