#pragma once

#include <cstddef>
#include <vector>

#include "roomrec/audio/types.hpp"

namespace roomrec::baseline {

struct MfccConfig {
    double low_hz = 0.0;
    double high_hz = 22050.0;
    std::size_t num_filters = 26;
    std::size_t num_ceps = 13;
    double frame_ms = 25.0;
    double hop_ms = 10.0;
    std::size_t fft_len = 2048;
    double sample_rate_hz = audio::kSampleRateHz;

    static MfccConfig broadband() { return {}; }
    static MfccConfig narrowband() {
        MfccConfig c;
        c.low_hz = 19500.0;
        c.high_hz = 20500.0;
        return c;
    }

    /// floor(ms * fs / 1000).
    [[nodiscard]] std::size_t frame_len() const;
    [[nodiscard]] std::size_t hop_len() const;
    /// Throws ConfigError on an invalid band, framing or cepstrum count.
    void validate() const;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// num_filters x (fft_len/2 + 1) triangular weights, edges spaced evenly on the mel scale
/// between low_hz and high_hz and evaluated at the exact bin frequencies.
std::vector<std::vector<double>> mel_filterbank(const MfccConfig &cfg);

/// Frames of the echo window (rectangular, no pre-emphasis), power spectrum |X|^2 / fft_len,
/// log mel energies (floor 1e-12), orthonormal DCT-II, first num_ceps per frame, concatenated.
std::vector<double> mfcc(const audio::EchoFrame &frame, const MfccConfig &cfg = {});

/// Number of frames mfcc() produces for `samples` input samples.
std::size_t mfcc_frames(std::size_t samples, const MfccConfig &cfg = {});

}  // namespace roomrec::baseline
