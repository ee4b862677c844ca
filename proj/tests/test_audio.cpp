#include <gtest/gtest.h>

#include <random>

#include "roomrec/audio/fft.hpp"
#include "roomrec/audio/framing.hpp"
#include "roomrec/audio/spectral.hpp"
#include "roomrec/audio/wav.hpp"
#include "roomrec/error.hpp"
#include "support/oracles.hpp"

using namespace roomrec;
using namespace roomrec::audio;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(n);
    for (auto &v : x) v = u(rng);
    return x;
}

AudioRecord noise_record(std::uint64_t seed, double scale = 0.5) {
    auto x = noise(kRecordSamples, seed);
    for (auto &v : x) v *= scale;
    return AudioRecord(x);
}

}  // namespace

TEST(Fft, MatchesNaiveDftForAllSmallLengths) {
    for (std::size_t n = 1; n <= 64; ++n) {
        const auto x = noise(n, n);
        const auto got = fft(x);
        const auto want = testsupport::naive_dft(x);
        ASSERT_EQ(got.size(), n);
        for (std::size_t k = 0; k < n; ++k) EXPECT_LT(std::abs(got[k] - want[k]), 1e-9) << "n=" << n << " k=" << k;
    }
}

TEST(Fft, MatchesNaiveDftForAwkwardLengths) {
    for (std::size_t n : {97u, 128u, 255u, 256u, 441u, 509u, 1000u, 1021u, 1024u}) {
        const auto x = noise(n, 1000 + n);
        const auto got = fft(x);
        const auto want = testsupport::naive_dft(x);
        double worst = 0;
        for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
        EXPECT_LT(worst, 1e-9) << "n=" << n;
    }
}

TEST(Fft, RfftIsTheNonRedundantHalf) {
    const auto x = noise(300, 3);
    const auto full = fft(x);
    const auto half = rfft(x);
    ASSERT_EQ(half.size(), 151u);
    for (std::size_t k = 0; k < half.size(); ++k) EXPECT_LT(std::abs(full[k] - half[k]), 1e-10);
}

TEST(Fft, PowerSpectrumZeroPads) {
    const auto x = noise(100, 4);
    std::vector<double> padded(x);
    padded.resize(256, 0.0);
    const auto want = testsupport::naive_dft(padded);
    const auto p = power_spectrum(x, 256);
    ASSERT_EQ(p.size(), 129u);
    for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(p[k], std::norm(want[k]), 1e-9);
    EXPECT_THROW(power_spectrum(x, 50), Error);
}

TEST(Framing, ChirpHas88SamplesAt20kHz) {
    const auto c = gen_chirp(ChirpConfig{});
    ASSERT_EQ(c.size(), 88u);
    EXPECT_DOUBLE_EQ(c[0], 0.0);
    EXPECT_NEAR(c[1], std::sin(2 * std::numbers::pi * 20000.0 / 44100.0), 1e-12);
}

TEST(Framing, ChirpConfigRejectsCarrierAtNyquist) {
    ChirpConfig cfg;
    cfg.carrier_hz = 22050.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.carrier_hz = 20000.0;
    cfg.amplitude = 1.5;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Framing, SegmentsRecordIntoChirpGuardEcho) {
    std::vector<double> x(kRecordSamples);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) / 1e4;
    const AudioRecord rec(x);
    const auto parts = segment_record(rec);
    EXPECT_EQ(parts.chirp.size(), 88u);
    EXPECT_EQ(parts.guard.size(), 22u);
    ASSERT_EQ(parts.echo.size(), 4300u);
    EXPECT_DOUBLE_EQ(parts.echo.samples()[0], x[110]);
    EXPECT_DOUBLE_EQ(parts.echo.samples().back(), x.back());
}

TEST(Framing, WrongLengthRecordIsRejected) {
    EXPECT_THROW(AudioRecord(std::vector<double>(4409, 0.0)), FramingError);
    EXPECT_THROW(EchoFrame(std::vector<double>(4301, 0.0)), FramingError);
    FrameLayout bad;
    bad.guard_samples = 23;
    EXPECT_THROW(segment_record(AudioRecord(), bad), FramingError);
}

TEST(Spectral, SpectrogramIs32x5AndMatchesDirectStft) {
    const auto rec = noise_record(11);
    const auto echo = echo_frame(rec);
    const auto spec = spectrogram(echo);
    ASSERT_EQ(spec.grid.size(), 32u * 5u);
    const auto bins = contained_bins(BandSelection{}, 256, kSampleRateHz);
    ASSERT_EQ(bins, (std::vector<std::size_t>{114, 115, 116, 117, 118}));
    for (std::size_t t : {0u, 7u, 31u}) {
        std::vector<double> frame(256);
        for (std::size_t i = 0; i < 256; ++i)
            frame[i] = echo.samples()[t * 128 + i] * 0.5 * (1 - std::cos(2 * std::numbers::pi * i / 256.0));
        const auto X = testsupport::naive_dft(frame);
        for (std::size_t f = 0; f < 5; ++f)
            EXPECT_NEAR(spec.at(t, f), 10 * std::log10(std::norm(X[bins[f]]) + 1e-12), 1e-9);
    }
    EXPECT_NEAR(spec.bin_hz[0], 114 * 44100.0 / 256, 1e-9);
}

TEST(Spectral, NarrowbandPsdHas147BinsInsideTheBand) {
    const auto rec = noise_record(12);
    const auto psd = psd_narrowband(echo_frame(rec));
    ASSERT_EQ(psd.values.size(), 147u);
    EXPECT_GE(psd.bin_hz.front(), 19500.0);
    EXPECT_LE(psd.bin_hz.back(), 20500.0);
    // direct periodogram of the zero-padded frame at the first kept bin
    const auto frame = echo_frame(rec);
    const auto x = frame.samples();
    const std::size_t k = 2866;
    long double re = 0, im = 0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        const long double a = -2.0L * std::numbers::pi_v<long double> * ((k * n) % 6480) / 6480.0L;
        re += x[n] * std::cos(a);
        im += x[n] * std::sin(a);
    }
    const double want = static_cast<double>(re * re + im * im) * 2.0 / (44100.0 * 4300.0);
    EXPECT_NEAR(psd.values[0], want, 1e-9 * std::max(1.0, want));
}

TEST(Spectral, LongPsdNeeds40Frames) {
    std::vector<EchoFrame> frames(39);
    EXPECT_THROW(long_psd(frames), ArgumentError);
    frames.resize(40);
    const auto psd = long_psd(frames);
    EXPECT_EQ(psd.input_points, 172000u);
    EXPECT_EQ(psd.values.size(), 86001u);
}

TEST(Spectral, SlidingCorrelationPeaksOnTheTemplate) {
    std::vector<double> x(kEchoSamples, 0.0);
    const double w = 2 * std::numbers::pi * 20000.0 / 44100.0;
    for (std::size_t i = 0; i < 88; ++i) x[1000 + i] = std::sin(w * static_cast<double>(i));
    const auto c = sliding_correlation(EchoFrame(x));
    EXPECT_NEAR(c[1000], 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(c[0], 0.0);
    for (double v : c) EXPECT_LE(std::abs(v), 1.0);
}

TEST(Wav, RoundTripsWithin16BitQuantisation) {
    const std::vector<AudioRecord> recs{noise_record(1), noise_record(2)};
    const auto bytes = encode_wav(recs);
    EXPECT_EQ(bytes.size(), 44u + 2u * 2u * kRecordSamples);
    const auto back = decode_wav(bytes);
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t i = 0; i < kRecordSamples; ++i)
            EXPECT_NEAR(back[r].samples()[i], recs[r].samples()[i], 1.0 / 32768.0);
    EXPECT_EQ(encode_wav(back), bytes);
}

TEST(Wav, RejectsUnsupportedFormatsNamingTheField) {
    const auto expect_field = [](const std::vector<std::uint8_t> &b, const std::string &field) {
        try {
            decode_wav(b);
            FAIL() << "expected FormatError for " << field;
        } catch (const FormatError &e) {
            EXPECT_EQ(e.field(), field);
        }
    };
    const std::vector<double> stereo(2 * kRecordSamples, 0.0);
    expect_field(encode_wav_samples(stereo, 2), "channels");
    expect_field(encode_wav_samples(std::vector<double>(kRecordSamples, 0.0), 1, 48000), "sample_rate");
    expect_field(encode_wav_samples(std::vector<double>(kRecordSamples + 1, 0.0)), "data");
    auto b = encode_wav(std::vector<AudioRecord>{AudioRecord()});
    b[0] = 'X';
    expect_field(b, "riff");
    auto t = encode_wav(std::vector<AudioRecord>{AudioRecord()});
    t.resize(t.size() - 10);
    expect_field(t, "data");
}
